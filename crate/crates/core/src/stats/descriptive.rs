/// Arithmetic mean, accumulated around the first value so constant data
/// returns that constant exactly. Empty input gives NaN.
pub fn mean(xs: &[f64]) -> f64 {
    let Some(&shift) = xs.first() else {
        return f64::NAN;
    };
    shift + xs.iter().map(|x| x - shift).sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (`n - 1` denominator); `None` below two values.
pub fn sample_sd(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m).powi(2)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// Standard error of the mean; `None` below two values.
pub fn std_error(xs: &[f64]) -> Option<f64> {
    sample_sd(xs).map(|sd| sd / (xs.len() as f64).sqrt())
}

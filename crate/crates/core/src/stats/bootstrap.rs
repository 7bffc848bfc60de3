//! Mean differences of log-scale indicators and their percentile bootstrap.
//!
//! Each bootstrap resample draws `|with|` values from `with` and `|without|`
//! values from `without`, independently and with replacement, and recomputes
//! the mean difference. A group whose values take few distinct levels (binary
//! or count-derived data) is resampled through its histogram: the resample
//! counts are one multinomial draw, generated as a chain of conditional
//! binomials. That is the same distribution as index draws at a fraction of
//! the cost. Groups with many distinct values use index draws.

use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::descriptive::mean;
use crate::error::{Error, Result};
use crate::rng::StreamRng;

pub const DEFAULT_RESAMPLES: usize = 500;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Difference of group means, `mean(with) - mean(without)`.
pub fn mean_log_diff(group_with: &[f64], group_without: &[f64]) -> Result<f64> {
    if group_with.is_empty() {
        return Err(Error::EmptyGroup("group_with"));
    }
    if group_without.is_empty() {
        return Err(Error::EmptyGroup("group_without"));
    }
    Ok(mean(group_with) - mean(group_without))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCI {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub resamples: usize,
    pub seed: u64,
}

impl BootstrapCI {
    pub fn excludes_zero(&self) -> bool {
        self.lo > 0.0 || self.hi < 0.0
    }
}

enum Resampler<'a> {
    Constant(f64),
    Indexed {
        values: &'a [f64],
        shift: f64,
    },
    Histogram {
        levels: Vec<(f64, u64)>,
        n: u64,
        shift: f64,
    },
}

impl<'a> Resampler<'a> {
    fn new(values: &'a [f64]) -> Resampler<'a> {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut levels: Vec<(f64, u64)> = Vec::new();
        for v in sorted {
            match levels.last_mut() {
                Some((last, count)) if last.to_bits() == v.to_bits() => *count += 1,
                _ => levels.push((v, 1)),
            }
        }
        let shift = values[0];
        if levels.len() == 1 {
            Resampler::Constant(levels[0].0)
        } else if levels.len() * 4 < values.len() {
            Resampler::Histogram {
                levels,
                n: values.len() as u64,
                shift,
            }
        } else {
            Resampler::Indexed { values, shift }
        }
    }

    fn resample_mean(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Resampler::Constant(c) => *c,
            Resampler::Indexed { values, shift } => {
                let n = values.len();
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += values[rng.random_range(0..n)] - shift;
                }
                shift + acc / n as f64
            }
            Resampler::Histogram { levels, n, shift } => {
                let mut remaining_draws = *n;
                let mut remaining_mass = *n;
                let mut acc = 0.0;
                for (i, &(value, count)) in levels.iter().enumerate() {
                    if remaining_draws == 0 {
                        break;
                    }
                    let k = if i + 1 == levels.len() {
                        remaining_draws
                    } else {
                        let p = count as f64 / remaining_mass as f64;
                        Binomial::new(remaining_draws, p.min(1.0))
                            .expect("binomial probability in [0, 1]")
                            .sample(rng)
                    };
                    acc += k as f64 * (value - shift);
                    remaining_draws -= k;
                    remaining_mass -= count;
                }
                shift + acc / *n as f64
            }
        }
    }
}

/// Linear-interpolation empirical quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile bootstrap CI for [`mean_log_diff`]; deterministic in `seed`.
pub fn bootstrap_ci(
    group_with: &[f64],
    group_without: &[f64],
    resamples: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapCI> {
    let point = mean_log_diff(group_with, group_without)?;
    if resamples < 1 {
        return Err(Error::InvalidInput(
            "bootstrap needs at least one resample".into(),
        ));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidInput(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let with = Resampler::new(group_with);
    let without = Resampler::new(group_without);
    let mut rng = StreamRng::seed_from_u64(seed);
    let mut stats: Vec<f64> = (0..resamples)
        .map(|_| {
            let a = with.resample_mean(&mut rng);
            let b = without.resample_mean(&mut rng);
            a - b
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    Ok(BootstrapCI {
        point,
        lo: quantile_sorted(&stats, alpha),
        hi: quantile_sorted(&stats, 1.0 - alpha),
        level,
        resamples,
        seed,
    })
}

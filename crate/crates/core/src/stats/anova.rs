use serde::{Deserialize, Serialize};

use super::descriptive::mean;
use super::special::f_sf;
use crate::error::{Error, Result};

/// One-way ANOVA summary. `f` is `+inf` (with `p = 0`) when every group is
/// internally constant but the group means differ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
}

pub fn anova_f(groups: &[Vec<f64>]) -> Result<AnovaResult> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput(
            "ANOVA needs at least two groups".into(),
        ));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("group {i} is empty")));
    }
    let k = groups.len();
    let n: usize = groups.iter().map(Vec::len).sum();
    if n <= k {
        return Err(Error::InvalidInput(format!(
            "ANOVA needs more observations ({n}) than groups ({k})"
        )));
    }
    let all: Vec<f64> = groups.iter().flatten().copied().collect();
    if all.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(
            "non-finite value in ANOVA input".into(),
        ));
    }
    let grand = mean(&all);
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = mean(g);
        ssb += g.len() as f64 * (m - grand).powi(2);
        ssw += g.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let df_between = k - 1;
    let df_within = n - k;
    let (f, p_value) = if ssw == 0.0 {
        if ssb == 0.0 {
            return Err(Error::Numeric("ANOVA with zero total variance".into()));
        }
        (f64::INFINITY, 0.0)
    } else {
        let f = (ssb / df_between as f64) / (ssw / df_within as f64);
        (
            f,
            f_sf(f, df_between as f64, df_within as f64).clamp(0.0, 1.0),
        )
    };
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p_value,
    })
}

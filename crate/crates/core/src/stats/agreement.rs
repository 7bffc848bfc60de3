use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementResult {
    pub kappa: f64,
    pub accuracy: f64,
    pub n: usize,
}

/// Cohen's kappa between two raters with marginal-product chance agreement.
pub fn cohen_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<AgreementResult> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::InvalidInput(format!(
            "label lists differ in length ({} vs {})",
            labels_a.len(),
            labels_b.len()
        )));
    }
    if labels_a.is_empty() {
        return Err(Error::InvalidInput("no labels to compare".into()));
    }
    let n = labels_a.len() as f64;
    let mut margins: HashMap<&T, (u64, u64)> = HashMap::new();
    let mut agree = 0u64;
    for (a, b) in labels_a.iter().zip(labels_b) {
        margins.entry(a).or_default().0 += 1;
        margins.entry(b).or_default().1 += 1;
        if a == b {
            agree += 1;
        }
    }
    let p_o = agree as f64 / n;
    let p_e: f64 = margins
        .values()
        .map(|&(x, y)| (x as f64 / n) * (y as f64 / n))
        .sum();
    let kappa = if (1.0 - p_e).abs() < 1e-15 {
        if p_o >= 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (p_o - p_e) / (1.0 - p_e)
    };
    Ok(AgreementResult {
        kappa,
        accuracy: p_o,
        n: labels_a.len(),
    })
}

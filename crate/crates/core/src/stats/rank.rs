//! Kruskal–Wallis H test and Dunn's pairwise post-hoc test on mid-ranks with
//! tie correction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::special::{chi_squared_sf, normal_two_sided_p};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub group_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Adjustment {
    None,
    #[default]
    Holm,
    Bonferroni,
}

impl fmt::Display for Adjustment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adjustment::None => "none",
            Adjustment::Holm => "holm",
            Adjustment::Bonferroni => "bonferroni",
        })
    }
}

impl FromStr for Adjustment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Adjustment::None),
            "holm" => Ok(Adjustment::Holm),
            "bonferroni" => Ok(Adjustment::Bonferroni),
            other => Err(Error::InvalidInput(format!(
                "unknown p-value adjustment {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseComparison {
    pub group_a: usize,
    pub group_b: usize,
    pub z_statistic: f64,
    pub p_raw: f64,
    pub p_adjusted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseTestResult {
    pub adjustment: Adjustment,
    pub pairs: Vec<PairwiseComparison>,
}

struct Ranked {
    rank_sums: Vec<f64>,
    sizes: Vec<usize>,
    n: usize,
    /// Σ (t³ − t) over tie groups.
    tie_term: f64,
}

fn check_groups(groups: &[Vec<f64>]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InvalidInput(
            "rank tests need at least two groups".into(),
        ));
    }
    if let Some(i) = groups.iter().position(Vec::is_empty) {
        return Err(Error::InvalidInput(format!("group {i} is empty")));
    }
    if groups.iter().flatten().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput("NaN in rank test input".into()));
    }
    Ok(())
}

fn rank(groups: &[Vec<f64>]) -> Ranked {
    let mut all: Vec<(f64, usize)> = groups
        .iter()
        .enumerate()
        .flat_map(|(g, xs)| xs.iter().map(move |&x| (x, g)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = all.len();
    let mut rank_sums = vec![0.0; groups.len()];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        // positions i..=j share the mid-rank
        let mid = (i + j) as f64 / 2.0 + 1.0;
        for item in &all[i..=j] {
            rank_sums[item.1] += mid;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    Ranked {
        rank_sums,
        sizes: groups.iter().map(Vec::len).collect(),
        n,
        tie_term,
    }
}

/// Kruskal–Wallis H with tie correction; H = 0 when every value is tied.
pub fn kruskal_wallis(groups: &[Vec<f64>]) -> Result<RankTestResult> {
    check_groups(groups)?;
    let r = rank(groups);
    let n = r.n as f64;
    let df = groups.len() - 1;
    let correction = 1.0 - r.tie_term / (n * n * n - n);
    let statistic = if correction <= 0.0 {
        0.0
    } else {
        let s: f64 = r
            .rank_sums
            .iter()
            .zip(&r.sizes)
            .map(|(rs, &ni)| rs * rs / ni as f64)
            .sum();
        let h = (12.0 / (n * (n + 1.0)) * s - 3.0 * (n + 1.0)) / correction;
        h.max(0.0)
    };
    Ok(RankTestResult {
        statistic,
        df,
        p_value: chi_squared_sf(statistic, df as f64).clamp(0.0, 1.0),
        group_sizes: r.sizes,
    })
}

fn adjust(p: &[f64], method: Adjustment) -> Vec<f64> {
    let m = p.len() as f64;
    match method {
        Adjustment::None => p.to_vec(),
        Adjustment::Bonferroni => p.iter().map(|x| (x * m).min(1.0)).collect(),
        Adjustment::Holm => {
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
            let mut out = vec![0.0; p.len()];
            let mut running = 0.0f64;
            for (k, &i) in order.iter().enumerate() {
                let v = ((m - k as f64) * p[i]).min(1.0);
                running = running.max(v);
                out[i] = running;
            }
            out
        }
    }
}

/// Dunn's test on mean ranks with pooled, tie-corrected variance. Pairs are
/// listed as (0,1), (0,2), ..., (1,2), ...
pub fn dunn_posthoc(groups: &[Vec<f64>], adjustment: Adjustment) -> Result<PairwiseTestResult> {
    check_groups(groups)?;
    let r = rank(groups);
    let n = r.n as f64;
    let base_var = n * (n + 1.0) / 12.0 - r.tie_term / (12.0 * (n - 1.0).max(1.0));
    let mut pairs = Vec::new();
    for a in 0..groups.len() {
        for b in a + 1..groups.len() {
            let (na, nb) = (r.sizes[a] as f64, r.sizes[b] as f64);
            let diff = r.rank_sums[a] / na - r.rank_sums[b] / nb;
            let var = base_var * (1.0 / na + 1.0 / nb);
            let z = if var > 0.0 { diff / var.sqrt() } else { 0.0 };
            pairs.push(PairwiseComparison {
                group_a: a,
                group_b: b,
                z_statistic: z,
                p_raw: normal_two_sided_p(z).clamp(0.0, 1.0),
                p_adjusted: 0.0,
            });
        }
    }
    let raw: Vec<f64> = pairs.iter().map(|p| p.p_raw).collect();
    for (pair, adj) in pairs.iter_mut().zip(adjust(&raw, adjustment)) {
        pair.p_adjusted = adj;
    }
    Ok(PairwiseTestResult { adjustment, pairs })
}

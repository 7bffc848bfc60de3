use serde::{Deserialize, Serialize};

use super::model::{fit, ClusterParams};
use super::predict::approximate_predict;
use crate::corpus::FeatureVector;
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::adjusted_rand_index;

/// Agreement between independently seeded subsample fits, each extended to
/// the whole input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub seeds: Vec<u64>,
    pub cluster_counts: Vec<usize>,
    pub noise_fractions: Vec<f64>,
    pub ari: Vec<Vec<f64>>,
    pub mean_ari: f64,
}

/// Seeds for `repeats` fits derived from the master seed in `params`.
pub fn repeat_seeds(master: u64, repeats: usize) -> Vec<u64> {
    (0..repeats)
        .map(|r| derive_seed(master, &format!("cluster/repeat/{r}")))
        .collect()
}

pub fn subsample_stability(
    vectors: &[FeatureVector],
    params: &ClusterParams,
    repeats: usize,
) -> Result<StabilityReport> {
    stability_with_seeds(vectors, params, &repeat_seeds(params.seed, repeats))
}

/// One fit per seed; the evaluation sample is the full input.
pub fn stability_with_seeds(
    vectors: &[FeatureVector],
    params: &ClusterParams,
    seeds: &[u64],
) -> Result<StabilityReport> {
    if seeds.len() < 2 {
        return Err(Error::InvalidInput(
            "stability needs at least two repeats".into(),
        ));
    }
    let mut labelings = Vec::with_capacity(seeds.len());
    let mut cluster_counts = Vec::new();
    let mut noise_fractions = Vec::new();
    for &seed in seeds {
        let p = ClusterParams {
            seed,
            ..params.clone()
        };
        let model = fit(vectors, &p)?;
        let labels: Vec<i32> = approximate_predict(&model, vectors)?
            .iter()
            .map(|m| m.label)
            .collect();
        cluster_counts.push(model.clusters.len());
        noise_fractions
            .push(labels.iter().filter(|&&l| l < 0).count() as f64 / labels.len() as f64);
        labelings.push(labels);
    }
    let r = seeds.len();
    let mut ari = vec![vec![1.0; r]; r];
    let mut total = 0.0;
    for a in 0..r {
        for b in a + 1..r {
            let x = adjusted_rand_index(&labelings[a], &labelings[b])?;
            ari[a][b] = x;
            ari[b][a] = x;
            total += x;
        }
    }
    Ok(StabilityReport {
        seeds: seeds.to_vec(),
        cluster_counts,
        noise_fractions,
        ari,
        mean_ari: total / (r * (r - 1) / 2) as f64,
    })
}

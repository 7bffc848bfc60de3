use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hierarchy::{core_level_of, level_lambda, mutual_reachability};
use super::model::{dedup, ClusterModel, Membership, NOISE};
use crate::corpus::{FeatureVector, MessageRecord};
use crate::error::{Error, Result};

/// Assign vectors to the fitted clusters.
///
/// A vector equal to a fitted vector takes that vector's fit label. Any other
/// vector is linked to its nearest fitted point under mutual reachability
/// (ties: smaller raw distance, then lower index) and joins that point's
/// cluster if the link is shorter than the distance at which the cluster
/// separates from its parent; otherwise it is noise.
pub fn approximate_predict(
    model: &ClusterModel,
    vectors: &[FeatureVector],
) -> Result<Vec<Membership>> {
    if model.points.is_empty() {
        return Err(Error::InvalidInput(
            "cluster model has no fitted points".into(),
        ));
    }
    let known: HashMap<FeatureVector, usize> = model
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| (p.vector, i))
        .collect();
    let fitted_vectors: Vec<FeatureVector> = model.points.iter().map(|p| p.vector).collect();
    let weights: Vec<u64> = model.points.iter().map(|p| p.weight).collect();
    let min_samples = model.params.min_samples as u64;
    let (queries, _, map) = dedup(vectors.iter().copied());
    let answers: Vec<Membership> = queries
        .par_iter()
        .map(|&q| {
            if let Some(&i) = known.get(&q) {
                let p = &model.points[i];
                return Membership {
                    label: p.label,
                    strength: p.strength,
                };
            }
            let core = core_level_of(q, 1, &fitted_vectors, &weights, min_samples);
            let (mrd, _, nearest) = model
                .points
                .iter()
                .enumerate()
                .map(|(j, p)| {
                    let d = q.hamming(p.vector);
                    (mutual_reachability(q, p.vector, core, p.core_level), d, j)
                })
                .min()
                .expect("model has points");
            let label = model.points[nearest].label;
            if label == NOISE {
                return Membership {
                    label: NOISE,
                    strength: 0.0,
                };
            }
            let info = &model.clusters[label as usize];
            let lambda = level_lambda(mrd);
            if lambda > info.birth_lambda {
                Membership {
                    label,
                    strength: lambda.min(info.max_lambda) / info.max_lambda,
                }
            } else {
                Membership {
                    label: NOISE,
                    strength: 0.0,
                }
            }
        })
        .collect();
    Ok(map.into_iter().map(|i| answers[i as usize]).collect())
}

/// Cluster membership of every corpus record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub ids: Vec<String>,
    pub memberships: Vec<Membership>,
}

impl ClusterAssignment {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = i32> + '_ {
        self.memberships.iter().map(|m| m.label)
    }

    pub fn noise_count(&self) -> usize {
        self.memberships.iter().filter(|m| m.is_noise()).count()
    }

    pub fn cluster_ids(&self) -> Vec<i32> {
        let mut ids: Vec<i32> = self.labels().filter(|&l| l != NOISE).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

pub fn assign_records(
    model: &ClusterModel,
    records: &[MessageRecord],
) -> Result<ClusterAssignment> {
    let vectors: Vec<FeatureVector> = records.iter().map(MessageRecord::features).collect();
    Ok(ClusterAssignment {
        ids: records.iter().map(|r| r.id.clone()).collect(),
        memberships: approximate_predict(model, &vectors)?,
    })
}

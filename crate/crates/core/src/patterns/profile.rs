use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cluster::{ClusterAssignment, NOISE};
use crate::corpus::{Category, CategorySet, MessageRecord, CATEGORY_COUNT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub id: i32,
    pub size: usize,
    /// Per-slot prevalence among members.
    pub centroid: Vec<f64>,
    /// Categories with prevalence at or above the dominance threshold.
    pub dominant: CategorySet,
}

impl ClusterProfile {
    pub fn dominant_codes(&self) -> Vec<&'static str> {
        self.dominant.iter().map(Category::code).collect()
    }
}

/// One profile per non-noise cluster, ordered by cluster id.
pub fn profile_clusters(
    assignment: &ClusterAssignment,
    records: &[MessageRecord],
    dominance_threshold: f64,
) -> Result<Vec<ClusterProfile>> {
    if assignment.len() != records.len() {
        return Err(Error::InvalidInput(format!(
            "assignment covers {} records, corpus has {}",
            assignment.len(),
            records.len()
        )));
    }
    let mut sums: BTreeMap<i32, (usize, [u64; CATEGORY_COUNT])> = BTreeMap::new();
    for ((id, m), r) in assignment
        .ids
        .iter()
        .zip(&assignment.memberships)
        .zip(records)
    {
        if id != &r.id {
            return Err(Error::InvalidInput(format!(
                "assignment id {id:?} does not match record {:?}",
                r.id
            )));
        }
        if m.label == NOISE {
            continue;
        }
        let entry = sums.entry(m.label).or_insert((0, [0; CATEGORY_COUNT]));
        entry.0 += 1;
        let bits = r.features().bits();
        for (slot, count) in entry.1.iter_mut().enumerate() {
            *count += u64::from((bits >> slot) & 1);
        }
    }
    if sums.is_empty() {
        return Err(Error::Validation(
            "every record is noise; no clusters to profile".into(),
        ));
    }
    Ok(sums
        .into_iter()
        .map(|(id, (size, counts))| {
            let centroid: Vec<f64> = counts.iter().map(|&c| c as f64 / size as f64).collect();
            let dominant = Category::ALL
                .iter()
                .copied()
                .filter(|c| centroid[c.slot()] >= dominance_threshold)
                .collect();
            ClusterProfile {
                id,
                size,
                centroid,
                dominant,
            }
        })
        .collect())
}

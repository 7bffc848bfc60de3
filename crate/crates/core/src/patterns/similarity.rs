use serde::{Deserialize, Serialize};

use super::assign::PatternAssignment;
use super::profile::ClusterProfile;
use crate::error::{Error, Result};
use crate::stats::{cosine_similarity, mean, sample_sd};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSimilarity {
    pub pattern: String,
    pub clusters: Vec<i32>,
    /// Mean pairwise centroid cosine within the pattern; `None` for a single cluster.
    pub within_mean: Option<f64>,
    pub pairs: Vec<SimilarPair>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarPair {
    pub a: i32,
    pub b: i32,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityReport {
    pub clusters: Vec<i32>,
    pub matrix: Vec<Vec<f64>>,
    pub patterns: Vec<PatternSimilarity>,
    /// Mean and SD over all off-diagonal pairs; `None` with fewer than two clusters.
    pub global_mean: Option<f64>,
    pub global_sd: Option<f64>,
    pub threshold: f64,
    /// Pairs above `threshold`, in matrix order.
    pub high_pairs: Vec<SimilarPair>,
}

impl SimilarityReport {
    pub fn within(&self, pattern: &str) -> Option<f64> {
        self.patterns
            .iter()
            .find(|p| p.pattern == pattern)
            .and_then(|p| p.within_mean)
    }
}

/// Cosine matrix over centroids with within-pattern and global summaries.
/// `pattern_order` fixes the order of the per-pattern entries.
pub fn similarity_report(
    profiles: &[ClusterProfile],
    assignments: &[PatternAssignment],
    pattern_order: &[String],
    threshold: f64,
) -> Result<SimilarityReport> {
    if profiles.is_empty() {
        return Err(Error::InvalidInput("no cluster profiles".into()));
    }
    let n = profiles.len();
    let mut matrix = vec![vec![1.0; n]; n];
    let mut off = Vec::new();
    let mut high_pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let s = cosine_similarity(&profiles[i].centroid, &profiles[j].centroid)?;
            matrix[i][j] = s;
            matrix[j][i] = s;
            off.push(s);
            if s > threshold {
                high_pairs.push(SimilarPair {
                    a: profiles[i].id,
                    b: profiles[j].id,
                    similarity: s,
                });
            }
        }
    }
    let pattern_of = |id: i32| {
        assignments
            .iter()
            .find(|a| a.cluster == id)
            .map(|a| a.pattern.as_str())
            .ok_or_else(|| Error::InvalidInput(format!("cluster {id} has no pattern")))
    };
    let labels: Vec<&str> = profiles
        .iter()
        .map(|p| pattern_of(p.id))
        .collect::<Result<_>>()?;
    let mut patterns = Vec::new();
    for name in pattern_order {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == name).collect();
        let mut pairs = Vec::new();
        for (x, &i) in idx.iter().enumerate() {
            for &j in &idx[x + 1..] {
                pairs.push(SimilarPair {
                    a: profiles[i].id,
                    b: profiles[j].id,
                    similarity: matrix[i][j],
                });
            }
        }
        let sims: Vec<f64> = pairs.iter().map(|p| p.similarity).collect();
        patterns.push(PatternSimilarity {
            pattern: name.clone(),
            clusters: idx.iter().map(|&i| profiles[i].id).collect(),
            within_mean: (!sims.is_empty()).then(|| mean(&sims)),
            pairs,
        });
    }
    if n < 2 {
        log::warn!("a single cluster: similarity summaries are undefined");
    }
    Ok(SimilarityReport {
        clusters: profiles.iter().map(|p| p.id).collect(),
        matrix,
        patterns,
        global_mean: (!off.is_empty()).then(|| mean(&off)),
        global_sd: sample_sd(&off),
        threshold,
        high_pairs,
    })
}

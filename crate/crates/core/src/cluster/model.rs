use std::collections::HashMap;
use std::path::Path;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::hierarchy::{condense, core_levels, select_eom, spanning_tree, CondensedRow};
use crate::corpus::FeatureVector;
use crate::error::{Error, Result};
use crate::rng::stream;

/// Label of points outside every selected cluster.
pub const NOISE: i32 = -1;

pub const MODEL_FORMAT: &str = "safecomb-cluster-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    #[default]
    ExcessOfMass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    pub metric: Metric,
    /// Fit on a seeded subsample of this many records (clamped to corpus size).
    pub subsample_size: usize,
    pub selection: Selection,
    pub seed: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_cluster_size: 100,
            min_samples: 25,
            metric: Metric::Euclidean,
            subsample_size: 300_000,
            selection: Selection::ExcessOfMass,
            seed: 0,
        }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::Config("min_cluster_size must be at least 2".into()));
        }
        if self.min_samples < 1 {
            return Err(Error::Config("min_samples must be at least 1".into()));
        }
        if self.min_samples > self.min_cluster_size {
            return Err(Error::Config(format!(
                "min_samples ({}) exceeds min_cluster_size ({})",
                self.min_samples, self.min_cluster_size
            )));
        }
        if self.subsample_size < self.min_cluster_size {
            return Err(Error::Config(format!(
                "subsample_size ({}) is below min_cluster_size ({})",
                self.subsample_size, self.min_cluster_size
            )));
        }
        Ok(())
    }
}

/// A distinct fitted vector with its multiplicity in the fitted sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPoint {
    pub vector: FeatureVector,
    pub weight: u64,
    pub core_level: u32,
    pub label: i32,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterInfo {
    pub id: i32,
    pub size: u64,
    /// Lambda at which the cluster separates from its parent.
    pub birth_lambda: f64,
    /// Largest lambda reached by any member.
    pub max_lambda: f64,
    pub stability: f64,
    pub exemplars: Vec<FeatureVector>,
    /// Index of the cluster in the condensed tree.
    pub tree_node: usize,
}

/// A fitted density hierarchy. Condensed-tree rows refer to distinct points by
/// index into `points` and to clusters by `points.len() + cluster index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub format: String,
    pub version: u32,
    pub params: ClusterParams,
    /// Corpus positions of the fitted records, ascending.
    pub subsample: Vec<usize>,
    /// Distinct point index of each fitted record.
    pub fitted: Vec<u32>,
    pub points: Vec<FittedPoint>,
    pub tree: Vec<CondensedRow>,
    pub clusters: Vec<ClusterInfo>,
}

/// Cluster label and membership strength of one vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub label: i32,
    pub strength: f64,
}

impl Membership {
    pub fn is_noise(&self) -> bool {
        self.label == NOISE
    }
}

/// Group vectors into distinct points in order of first occurrence.
pub(crate) fn dedup(
    vectors: impl IntoIterator<Item = FeatureVector>,
) -> (Vec<FeatureVector>, Vec<u64>, Vec<u32>) {
    let mut index: HashMap<FeatureVector, u32> = HashMap::new();
    let mut distinct = Vec::new();
    let mut weights = Vec::new();
    let mut map = Vec::new();
    for v in vectors {
        let i = *index.entry(v).or_insert_with(|| {
            distinct.push(v);
            weights.push(0);
            (distinct.len() - 1) as u32
        });
        weights[i as usize] += 1;
        map.push(i);
    }
    (distinct, weights, map)
}

fn choose_subsample(n: usize, params: &ClusterParams) -> Vec<usize> {
    if params.subsample_size >= n {
        return (0..n).collect();
    }
    let mut rng = stream(params.seed, "cluster/subsample");
    let mut idx = sample(&mut rng, n, params.subsample_size).into_vec();
    idx.sort_unstable();
    idx
}

/// Fit the hierarchy on a seeded subsample of `vectors`.
pub fn fit(vectors: &[FeatureVector], params: &ClusterParams) -> Result<ClusterModel> {
    params.validate()?;
    if vectors.len() < params.min_cluster_size {
        return Err(Error::InvalidInput(format!(
            "corpus of {} records is smaller than min_cluster_size {}",
            vectors.len(),
            params.min_cluster_size
        )));
    }
    let subsample = choose_subsample(vectors.len(), params);
    let (distinct, weights, fitted) = dedup(subsample.iter().map(|&i| vectors[i]));
    log::info!(
        "fitting {} records ({} distinct vectors)",
        subsample.len(),
        distinct.len()
    );
    let cores = core_levels(&distinct, &weights, params.min_samples as u64);
    let edges = spanning_tree(&distinct, &cores);
    let h = condense(&weights, &cores, &edges, params.min_cluster_size as u64);
    let n = distinct.len();
    let selected = select_eom(&h, n);

    // nearest selected ancestor of every condensed cluster (parents come first)
    let k = h.cluster_parent.len();
    let mut owner: Vec<Option<usize>> = vec![None; k];
    for c in 0..k {
        owner[c] = if selected[c] {
            Some(c)
        } else {
            h.cluster_parent[c].and_then(|p| owner[p])
        };
    }
    let point_owner: Vec<Option<usize>> = h.point_cluster.iter().map(|&c| owner[c]).collect();

    // number selected clusters by their first member in corpus order
    let mut order: Vec<usize> = Vec::new();
    for &p in &fitted {
        if let Some(c) = point_owner[p as usize] {
            if !order.contains(&c) {
                order.push(c);
            }
        }
    }
    let label_of = |c: usize| {
        order
            .iter()
            .position(|&x| x == c)
            .expect("selected cluster") as i32
    };

    let mut stability = vec![0.0; k];
    for row in &h.rows {
        let c = row.parent - n;
        stability[c] += row.size as f64 * (row.lambda - h.cluster_birth[c]);
    }
    let mut clusters: Vec<ClusterInfo> = order
        .iter()
        .enumerate()
        .map(|(id, &c)| ClusterInfo {
            id: id as i32,
            size: 0,
            birth_lambda: h.cluster_birth[c],
            max_lambda: 0.0,
            stability: stability[c],
            exemplars: Vec::new(),
            tree_node: c,
        })
        .collect();
    for p in 0..n {
        if let Some(c) = point_owner[p] {
            let info = &mut clusters[label_of(c) as usize];
            info.size += weights[p];
            info.max_lambda = info.max_lambda.max(h.point_lambda[p]);
        }
    }
    let points: Vec<FittedPoint> = (0..n)
        .map(|p| {
            let (label, strength) = match point_owner[p] {
                Some(c) => {
                    let id = label_of(c);
                    let max = clusters[id as usize].max_lambda;
                    (id, h.point_lambda[p].min(max) / max)
                }
                None => (NOISE, 0.0),
            };
            FittedPoint {
                vector: distinct[p],
                weight: weights[p],
                core_level: cores[p],
                label,
                strength,
            }
        })
        .collect();
    for (p, point) in points.iter().enumerate() {
        if point.label != NOISE && point.strength == 1.0 {
            clusters[point.label as usize].exemplars.push(distinct[p]);
        }
    }
    let model = ClusterModel {
        format: MODEL_FORMAT.to_string(),
        version: MODEL_VERSION,
        params: params.clone(),
        subsample,
        fitted,
        points,
        tree: h.rows,
        clusters,
    };
    log::info!(
        "{} clusters, {:.1}% of fitted records noise",
        model.clusters.len(),
        100.0 * model.noise_fraction()
    );
    Ok(model)
}

impl ClusterModel {
    /// Label of each fitted record, in subsample order.
    pub fn labels(&self) -> Vec<i32> {
        self.fitted
            .iter()
            .map(|&p| self.points[p as usize].label)
            .collect()
    }

    pub fn n_fitted(&self) -> usize {
        self.fitted.len()
    }

    pub fn noise_fraction(&self) -> f64 {
        if self.fitted.is_empty() {
            return 0.0;
        }
        let noise: u64 = self
            .points
            .iter()
            .filter(|p| p.label == NOISE)
            .map(|p| p.weight)
            .sum();
        noise as f64 / self.fitted.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Decode and check a serialized model.
    pub fn from_json(text: &str) -> Result<ClusterModel> {
        let model: ClusterModel = serde_json::from_str(text)?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<ClusterModel> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ClusterModel::from_json(&text)
    }

    /// Structural consistency of a (possibly foreign) model.
    pub fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(format!("cluster model: {m}")));
        if self.format != MODEL_FORMAT {
            return bad(format!("unknown format {:?}", self.format));
        }
        if self.version != MODEL_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        self.params.validate()?;
        if self.points.is_empty() {
            return bad("no fitted points".into());
        }
        if self.fitted.len() != self.subsample.len() {
            return bad("fitted and subsample lengths differ".into());
        }
        if self.subsample.windows(2).any(|w| w[0] >= w[1]) {
            return bad("subsample indices not strictly ascending".into());
        }
        let n = self.points.len();
        let mut weights = vec![0u64; n];
        for &p in &self.fitted {
            match weights.get_mut(p as usize) {
                Some(w) => *w += 1,
                None => return bad(format!("fitted index {p} out of range")),
            }
        }
        let k = self.clusters.len() as i32;
        for (p, point) in self.points.iter().enumerate() {
            if point.weight != weights[p] {
                return bad(format!("weight of point {p} disagrees with fitted records"));
            }
            if point.label < NOISE || point.label >= k {
                return bad(format!("label {} of point {p} out of range", point.label));
            }
            if !(0.0..=1.0).contains(&point.strength) {
                return bad(format!("strength of point {p} outside [0, 1]"));
            }
            if point.core_level > super::hierarchy::MAX_LEVEL {
                return bad(format!("core level of point {p} out of range"));
            }
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.id != i as i32 {
                return bad(format!("cluster {i} has id {}", c.id));
            }
            if !(c.birth_lambda >= 0.0
                && c.max_lambda > 0.0
                && c.birth_lambda.is_finite()
                && c.max_lambda.is_finite())
            {
                return bad(format!("cluster {i} has invalid lambdas"));
            }
        }
        for row in &self.tree {
            if !(row.lambda >= 0.0 && row.lambda.is_finite()) {
                return bad("negative or non-finite lambda in condensed tree".into());
            }
        }
        Ok(())
    }
}

use serde::{Deserialize, Serialize};

use super::config::PatternConfig;
use super::profile::ClusterProfile;
use crate::corpus::FeatureVector;
use crate::error::{Error, Result};
use crate::stats::cosine_similarity;

const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternAssignment {
    pub cluster: i32,
    pub pattern: String,
    /// Cosine similarity between the centroid and the matched prototype.
    pub similarity: f64,
    pub prototype: Option<FeatureVector>,
    pub overridden: bool,
}

/// Nearest-prototype pattern for every profile; explicit overrides win.
/// Returns the assignments and any tie warnings.
pub fn assign_patterns(
    profiles: &[ClusterProfile],
    config: &PatternConfig,
) -> Result<(Vec<PatternAssignment>, Vec<String>)> {
    config.validate()?;
    let protos = config.prototype_vectors()?;
    let mut warnings = Vec::new();
    let mut out = Vec::with_capacity(profiles.len());
    for p in profiles {
        if let Some(name) = config.override_for(p.id) {
            out.push(PatternAssignment {
                cluster: p.id,
                pattern: name.to_string(),
                similarity: best_in(&p.centroid, &protos, name)?.0,
                prototype: None,
                overridden: true,
            });
            continue;
        }
        let mut best: Option<(f64, usize, FeatureVector)> = None;
        let mut tied: Vec<&str> = Vec::new();
        for (pi, (name, vs)) in protos.iter().enumerate() {
            for &v in vs {
                let s = cosine_similarity(&p.centroid, &v.to_dense()).map_err(|_| {
                    Error::Numeric(format!("centroid of cluster {} is all zero", p.id))
                })?;
                match best {
                    Some((b, bi, _)) if s <= b + TIE_EPS => {
                        if s >= b - TIE_EPS && bi != pi && !tied.contains(&name.as_str()) {
                            tied.push(name);
                        }
                    }
                    _ => {
                        tied.clear();
                        best = Some((s, pi, v));
                    }
                }
            }
        }
        let (similarity, pi, v) = best.expect("config has prototypes");
        if !tied.is_empty() {
            let msg = format!(
                "cluster {} is equally close to patterns {} and {}; assigned {}",
                p.id,
                protos[pi].0,
                tied.join(", "),
                protos[pi].0
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        out.push(PatternAssignment {
            cluster: p.id,
            pattern: protos[pi].0.clone(),
            similarity,
            prototype: Some(v),
            overridden: false,
        });
    }
    Ok((out, warnings))
}

fn best_in(
    centroid: &[f64],
    protos: &[(String, Vec<FeatureVector>)],
    name: &str,
) -> Result<(f64, FeatureVector)> {
    let (_, vs) = protos
        .iter()
        .find(|(n, _)| n == name)
        .expect("validated override");
    let mut best: Option<(f64, FeatureVector)> = None;
    for &v in vs {
        let s = cosine_similarity(centroid, &v.to_dense())?;
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, v));
        }
    }
    Ok(best.expect("pattern has prototypes"))
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_code_list, CategorySet, Dimension, FeatureVector, Indicator};
use crate::error::{Error, Result};
use crate::synergy::{default_baselines, is_consistent, BaselinePredicate};
use crate::tiers::Tier;

/// How label noise perturbs a prototype.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipMode {
    /// With probability `flip_rate`, one uniformly chosen slot is flipped.
    #[default]
    Record,
    /// Every slot flips independently with probability `flip_rate`.
    Slot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub name: String,
    /// Code list of the prototype, e.g. `"NoSrc+Valu+Gain+NoEv"`.
    pub prototype: String,
    pub size: usize,
}

impl Population {
    pub fn vector(&self) -> Result<FeatureVector> {
        let set = parse_code_list(&self.prototype)?;
        FeatureVector::from_set(set).map_err(|v| {
            Error::Config(format!(
                "prototype {:?} of {}: {v}",
                self.prototype, self.name
            ))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogNormal {
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngagementModel {
    pub likes: LogNormal,
    pub comments: LogNormal,
    pub shares: LogNormal,
}

impl Default for EngagementModel {
    fn default() -> Self {
        EngagementModel {
            likes: LogNormal {
                mu: 3.0,
                sigma: 1.0,
            },
            comments: LogNormal {
                mu: 1.5,
                sigma: 1.0,
            },
            shares: LogNormal {
                mu: 1.0,
                sigma: 1.0,
            },
        }
    }
}

impl EngagementModel {
    pub fn get(&self, indicator: Indicator) -> LogNormal {
        match indicator {
            Indicator::Likes => self.likes,
            Indicator::Comments => self.comments,
            Indicator::Shares => self.shares,
        }
    }
}

/// Additive log-scale shift for records satisfying `baseline` and carrying
/// every category of `combination`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedEffect {
    pub baseline: String,
    pub combination: CategorySet,
    pub indicator: Indicator,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tier: Option<Tier>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub populations: Vec<Population>,
    pub flip_rate: f64,
    pub flip_mode: FlipMode,
    /// Records with uniformly random (then repaired) labels.
    pub uniform_records: usize,
    pub accounts: usize,
    pub followers: LogNormal,
    pub engagement: EngagementModel,
    pub effects: Vec<PlantedEffect>,
    /// Predicates that planted effects refer to by name.
    pub baselines: Vec<BaselinePredicate>,
}

fn pop(name: &str, prototype: &str, size: usize) -> Population {
    Population {
        name: name.into(),
        prototype: prototype.into(),
        size,
    }
}

impl Default for GeneratorSpec {
    /// Four pattern representatives, 5,000 records each, 5% label noise and
    /// 2,000 uniform records.
    fn default() -> Self {
        GeneratorSpec {
            seed: 0,
            populations: vec![
                pop("IAP", "Exp+Valu+Gain+ExpEv", 5000),
                pop("NP", "NoSrc+Valu+Gain+Narr", 5000),
                pop("AA", "NoSrc+Valu+Gain+NoEv", 5000),
                pop("CE", "NoSrc+NoApp+NoFrm+NoEv", 5000),
            ],
            flip_rate: 0.05,
            flip_mode: FlipMode::Record,
            uniform_records: 2000,
            accounts: 200,
            followers: LogNormal {
                mu: 12.0,
                sigma: 1.2,
            },
            engagement: EngagementModel::default(),
            effects: Vec::new(),
            baselines: default_baselines(),
        }
    }
}

impl GeneratorSpec {
    pub fn from_json(text: &str) -> Result<GeneratorSpec> {
        let spec: GeneratorSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<GeneratorSpec> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        GeneratorSpec::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn total_records(&self) -> usize {
        self.populations
            .iter()
            .fold(self.uniform_records, |acc, p| acc.saturating_add(p.size))
    }

    pub fn baseline(&self, name: &str) -> Option<&BaselinePredicate> {
        self.baselines.iter().find(|b| b.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.flip_rate) {
            return Err(Error::Config(format!(
                "flip_rate {} outside [0, 0.5)",
                self.flip_rate
            )));
        }
        if self.accounts == 0 {
            return Err(Error::Config("accounts must be positive".into()));
        }
        if !(self.followers.sigma >= 0.0 && self.followers.mu.is_finite()) {
            return Err(Error::Config(
                "follower distribution needs finite mu and sigma >= 0".into(),
            ));
        }
        for ind in Indicator::ALL {
            let m = self.engagement.get(ind);
            if !(m.sigma > 0.0 && m.sigma.is_finite() && m.mu.is_finite()) {
                return Err(Error::Config(format!(
                    "{ind}: sigma must be positive and mu finite"
                )));
            }
        }
        for p in &self.populations {
            p.vector()?;
        }
        for b in &self.baselines {
            b.validate()?;
        }
        for e in &self.effects {
            let b = self.baseline(&e.baseline).ok_or_else(|| {
                Error::Config(format!(
                    "planted effect refers to unknown baseline {:?}",
                    e.baseline
                ))
            })?;
            if e.combination.is_empty() || !is_consistent(e.combination) {
                return Err(Error::Config(format!(
                    "planted combination {} is not consistent",
                    e.combination
                )));
            }
            if !b.peripheral_universe().is_superset(e.combination) {
                return Err(Error::Config(format!(
                    "planted combination {} lies outside the {} universe",
                    e.combination, b.name
                )));
            }
            if !e.beta.is_finite() {
                return Err(Error::Config("planted beta must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Frame kept when repair has to choose between frames.
pub(crate) fn prototype_frame(v: FeatureVector) -> Option<crate::corpus::Category> {
    v.set().restrict(Dimension::Frame).iter().next()
}

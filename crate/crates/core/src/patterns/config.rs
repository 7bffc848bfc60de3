use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_code_list, FeatureVector};
use crate::error::{Error, Result};

pub const DEFAULT_DOMINANCE: f64 = 0.5;
pub const DEFAULT_REPORT_THRESHOLD: f64 = 0.6;

/// A named pattern and the representative combinations that define it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDef {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Code lists such as `"Exp+Valu+Gain+ExpEv"`.
    pub prototypes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    pub dominance_threshold: f64,
    pub report_threshold: f64,
    pub patterns: Vec<PatternDef>,
    /// Cluster id (as a string key) to pattern name; wins over nearest-prototype assignment.
    pub overrides: BTreeMap<String, String>,
}

fn def(name: &str, description: &str, prototypes: &[&str]) -> PatternDef {
    PatternDef {
        name: name.to_string(),
        description: description.to_string(),
        prototypes: prototypes.iter().map(|s| s.to_string()).collect(),
    }
}

impl Default for PatternConfig {
    /// The four patterns with their representative combinations. Alternatives
    /// within a combination are expanded into separate prototypes.
    fn default() -> Self {
        PatternConfig {
            dominance_threshold: DEFAULT_DOMINANCE,
            report_threshold: DEFAULT_REPORT_THRESHOLD,
            patterns: vec![
                def(
                    "IAP",
                    "Institutional Authority Persuasion",
                    &[
                        "Exp+Valu+Gain+ExpEv",
                        "Exp+Util+Gain+ExpEv",
                        "Exp+Valu+Util+Gain+ExpEv",
                        "Exp+NoApp+Gain+ExpEv",
                        "Exp+NoApp+NoFrm+ExpEv",
                        "OffM+Valu+Gain+NoEv",
                        "OffM+Valu+Gain+ExpEv",
                        "OffM+Util+Gain+NoEv",
                        "OffM+Util+Gain+ExpEv",
                        "OffM+Exp+Valu+Gain+Stat",
                        "OffM+Exp+Valu+Gain+ExpEv",
                    ],
                ),
                def(
                    "NP",
                    "Narrative Persuasion",
                    &[
                        "NoSrc+Valu+Gain+Narr",
                        "NoSrc+Util+Gain+Narr",
                        "NoSrc+Valu+Util+Gain+Narr",
                        "NoSrc+NoApp+Gain+Narr",
                        "NoSrc+NoApp+NoFrm+Narr",
                        "Exp+Valu+Gain+Narr",
                    ],
                ),
                def(
                    "AA",
                    "Assertive Appeal",
                    &[
                        "NoSrc+Valu+Gain+NoEv",
                        "NoSrc+Util+Gain+NoEv",
                        "NoSrc+Valu+Util+Gain+NoEv",
                        "NoSrc+Fear+Gain+NoEv",
                        "NoSrc+Fear+Loss+NoEv",
                    ],
                ),
                def(
                    "CE",
                    "Contextual Expression",
                    &[
                        "NoSrc+NoApp+NoFrm+NoEv",
                        "NoSrc+NoApp+Gain+NoEv",
                        "OffM+NoApp+Gain+NoEv",
                        "Exp+NoApp+Gain+NoEv",
                    ],
                ),
            ],
            overrides: BTreeMap::new(),
        }
    }
}

impl PatternConfig {
    pub fn from_toml(text: &str) -> Result<PatternConfig> {
        let config: PatternConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<PatternConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PatternConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.patterns.is_empty() {
            return Err(Error::Config("pattern config defines no patterns".into()));
        }
        if !(0.0..=1.0).contains(&self.dominance_threshold) {
            return Err(Error::Config(
                "dominance_threshold must lie in [0, 1]".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&self.report_threshold) {
            return Err(Error::Config("report_threshold must lie in [-1, 1]".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for p in &self.patterns {
            if !seen.insert(p.name.as_str()) {
                return Err(Error::Config(format!(
                    "duplicate pattern name {:?}",
                    p.name
                )));
            }
            if p.prototypes.is_empty() {
                return Err(Error::Config(format!(
                    "pattern {} has no prototypes",
                    p.name
                )));
            }
        }
        self.prototype_vectors()?;
        for (cluster, pattern) in &self.overrides {
            cluster
                .parse::<i32>()
                .ok()
                .filter(|c| *c >= 0)
                .ok_or_else(|| {
                    Error::Config(format!("override key {cluster:?} is not a cluster id"))
                })?;
            if !self.patterns.iter().any(|p| &p.name == pattern) {
                return Err(Error::Config(format!(
                    "override for cluster {cluster} names unknown pattern {pattern:?}"
                )));
            }
        }
        Ok(())
    }

    /// Parsed prototypes per pattern, in declaration order.
    pub fn prototype_vectors(&self) -> Result<Vec<(String, Vec<FeatureVector>)>> {
        self.patterns
            .iter()
            .map(|p| {
                let vs = p
                    .prototypes
                    .iter()
                    .map(|codes| {
                        let set = parse_code_list(codes)?;
                        FeatureVector::from_set(set).map_err(|v| {
                            Error::Config(format!("prototype {codes:?} of pattern {}: {v}", p.name))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((p.name.clone(), vs))
            })
            .collect()
    }

    pub fn override_for(&self, cluster: i32) -> Option<&str> {
        self.overrides.get(&cluster.to_string()).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = PatternConfig::default();
        c.validate().unwrap();
        let names: Vec<&str> = c.patterns.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, ["IAP", "NP", "AA", "CE"]);
        let total: usize = c.patterns.iter().map(|p| p.prototypes.len()).sum();
        assert_eq!(total, 26);
    }

    #[test]
    fn toml_round_trip_and_overrides() {
        let text = r#"
dominance_threshold = 0.4

[[patterns]]
name = "A"
prototypes = ["NoSrc+Valu+Gain+NoEv"]

[[patterns]]
name = "B"
prototypes = ["Exp+Valu+Gain+ExpEv", "OffM+Util+Gain+NoEv"]

[overrides]
3 = "B"
"#;
        let c = PatternConfig::from_toml(text).unwrap();
        assert_eq!(c.dominance_threshold, 0.4);
        assert_eq!(c.report_threshold, DEFAULT_REPORT_THRESHOLD);
        assert_eq!(c.override_for(3), Some("B"));
        assert_eq!(PatternConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }

    #[test]
    fn invalid_configs() {
        let dup = "[[patterns]]\nname = \"A\"\nprototypes = [\"NoSrc+Valu+Gain+NoEv\"]\n[[patterns]]\nname = \"A\"\nprototypes = [\"NoSrc+Valu+Gain+NoEv\"]\n";
        assert!(PatternConfig::from_toml(dup).is_err());
        let bad_proto = "[[patterns]]\nname = \"A\"\nprototypes = [\"NoSrc+Exp+Gain+NoEv\"]\n";
        assert!(PatternConfig::from_toml(bad_proto).is_err());
        let bad_override = "[[patterns]]\nname = \"A\"\nprototypes = [\"NoSrc+Valu+Gain+NoEv\"]\n[overrides]\n1 = \"Z\"\n";
        assert!(PatternConfig::from_toml(bad_override).is_err());
        assert!(PatternConfig::from_toml("patterns = []").is_err());
    }
}

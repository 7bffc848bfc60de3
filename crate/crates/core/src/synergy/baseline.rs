use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{parse_code_list, CategorySet, Dimension, FeatureVector};
use crate::error::{Error, Result};

/// Core structure of a pattern: every `required` group must be represented
/// (a group with several categories is a disjunction) and no `forbidden`
/// category may be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselinePredicate {
    pub name: String,
    pub required: Vec<CodeGroup>,
    #[serde(default)]
    pub forbidden: CodeGroup,
    #[serde(default = "default_core_size")]
    pub core_size: usize,
}

fn default_core_size() -> usize {
    2
}

/// A category set written as a code list (`"Exp|OffM"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CodeGroup(pub CategorySet);

impl Serialize for CodeGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.join_codes("|"))
    }
}

impl<'de> Deserialize<'de> for CodeGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_code_list(&s)
            .map(CodeGroup)
            .map_err(serde::de::Error::custom)
    }
}

fn group(codes: &str) -> CodeGroup {
    CodeGroup(parse_code_list(codes).expect("built-in code list"))
}

/// The four pattern baselines.
pub fn default_baselines() -> Vec<BaselinePredicate> {
    let b = |name: &str, required: &[&str]| BaselinePredicate {
        name: name.to_string(),
        required: required.iter().map(|r| group(r)).collect(),
        forbidden: CodeGroup::default(),
        core_size: 2,
    };
    vec![
        b("IAP", &["Exp|OffM", "ExpEv"]),
        b("NP", &["Narr", "NoSrc"]),
        b("AA", &["NoSrc", "NoEv"]),
        b("CE", &["NoApp", "NoEv"]),
    ]
}

impl BaselinePredicate {
    pub fn matches_bits(&self, bits: u32) -> bool {
        self.required.iter().all(|g| g.0.bits() & bits != 0) && self.forbidden.0.bits() & bits == 0
    }

    pub fn matches(&self, v: FeatureVector) -> bool {
        self.matches_bits(v.bits())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("baseline {}: {m}", self.name)));
        if self.name.trim().is_empty() {
            return Err(Error::Config("baseline with empty name".into()));
        }
        if self.required.iter().any(|g| g.0.is_empty()) {
            return bad("empty required group".into());
        }
        let required = self.required_union();
        if required.intersects(self.forbidden.0) {
            return bad(format!(
                "{} both required and forbidden",
                required.intersection(self.forbidden.0)
            ));
        }
        if !all_valid_vectors().any(|v| self.matches(v)) {
            return bad("no valid record can satisfy it".into());
        }
        Ok(())
    }

    fn required_union(&self) -> CategorySet {
        self.required
            .iter()
            .fold(CategorySet::EMPTY, |acc, g| acc.union(g.0))
    }

    /// Categories that may be added on top of the baseline: everything not
    /// named by it, excluding categories that no satisfying record can carry
    /// next to the baseline (the other side of a required absence marker, a
    /// marker whose dimension is required to be present, other frames).
    pub fn peripheral_universe(&self) -> CategorySet {
        let mut excluded = self.required_union().union(self.forbidden.0);
        for g in &self.required {
            let dims: Vec<Dimension> = Dimension::ALL
                .into_iter()
                .filter(|d| !g.0.restrict(*d).is_empty())
                .collect();
            let [dim] = dims[..] else { continue };
            let marker = dim.absence_marker();
            if g.0 == CategorySet::EMPTY.with(marker) {
                excluded = excluded.union(CategorySet::from_bits(dim.mask()));
            } else if !g.0.contains(marker) {
                excluded.insert(marker);
                if dim == Dimension::Frame {
                    excluded = excluded.union(CategorySet::from_bits(dim.mask()).difference(g.0));
                }
            }
        }
        let universe = CategorySet::FULL.difference(excluded);
        if universe.is_empty() {
            log::warn!("baseline {} leaves no peripheral categories", self.name);
        }
        universe
    }
}

impl fmt::Display for BaselinePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self.required.iter().map(|g| g.0.join_codes("|")).collect();
        write!(f, "{}: {}", self.name, groups.join(" & "))?;
        if !self.forbidden.0.is_empty() {
            write!(f, " & not {}", self.forbidden.0.join_codes("|"))?;
        }
        Ok(())
    }
}

/// Every valid feature vector (about 49k).
pub fn all_valid_vectors() -> impl Iterator<Item = FeatureVector> {
    (0u32..1 << 20).filter_map(|bits| FeatureVector::from_bits(bits).ok())
}

/// At most one frame, and an absence marker never shares its dimension with
/// another category.
pub fn is_consistent(s: CategorySet) -> bool {
    if s.restrict(Dimension::Frame).len() > 1 {
        return false;
    }
    Dimension::ALL.into_iter().all(|d| {
        let part = s.restrict(d);
        !(part.contains(d.absence_marker()) && part.len() > 1)
    })
}

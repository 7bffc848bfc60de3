use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::MessageRecord;
use crate::error::{Error, Result};
use crate::stats::{anova_f, mean, sample_sd, AnovaResult};

pub const TOP_PERCENTILE: f64 = 90.0;
pub const MIDDLE_PERCENTILE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Top,
    Middle,
    Bottom,
}

impl Tier {
    pub const ALL: [Tier; 3] = [Tier::Top, Tier::Middle, Tier::Bottom];

    pub const fn name(self) -> &'static str {
        match self {
            Tier::Top => "top",
            Tier::Middle => "middle",
            Tier::Bottom => "bottom",
        }
    }

    /// Head/Mid/Tail labels used in complexity tables.
    pub const fn short(self) -> &'static str {
        match self {
            Tier::Top => "Head",
            Tier::Middle => "Mid",
            Tier::Bottom => "Tail",
        }
    }

    pub fn from_percentile(pct: f64) -> Tier {
        if pct >= TOP_PERCENTILE {
            Tier::Top
        } else if pct >= MIDDLE_PERCENTILE {
            Tier::Middle
        } else {
            Tier::Bottom
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "top" | "head" => Ok(Tier::Top),
            "middle" | "mid" => Ok(Tier::Middle),
            "bottom" | "tail" => Ok(Tier::Bottom),
            other => Err(Error::InvalidInput(format!("unknown tier {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSummary {
    pub tier: Tier,
    pub accounts: usize,
    pub follower_mean: Option<f64>,
    pub follower_sd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierPartition {
    pub assignments: BTreeMap<String, Tier>,
    pub percentiles: BTreeMap<String, f64>,
    pub summaries: Vec<TierSummary>,
    pub anova: Option<AnovaResult>,
    /// Why the ANOVA is missing, when it is.
    pub anova_note: Option<String>,
}

impl TierPartition {
    pub fn tier_of(&self, account: &str) -> Option<Tier> {
        self.assignments.get(account).copied()
    }

    pub fn summary(&self, tier: Tier) -> &TierSummary {
        self.summaries
            .iter()
            .find(|s| s.tier == tier)
            .expect("all tiers summarized")
    }

    pub fn sizes(&self) -> [usize; 3] {
        Tier::ALL.map(|t| self.summary(t).accounts)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Follower count per account. Accounts whose records disagree take the
/// largest count seen.
pub fn account_followers(records: &[MessageRecord]) -> BTreeMap<String, u64> {
    let mut out: BTreeMap<String, u64> = BTreeMap::new();
    let mut conflicts = 0usize;
    for r in records {
        match out.get_mut(&r.account_id) {
            Some(f) if *f != r.followers => {
                conflicts += 1;
                *f = (*f).max(r.followers);
            }
            Some(_) => {}
            None => {
                out.insert(r.account_id.clone(), r.followers);
            }
        }
    }
    if conflicts > 0 {
        log::warn!(
            "{conflicts} records disagree with their account's follower count; using the maximum"
        );
    }
    out
}

/// Percentile tiers over accounts: `pct = 100 * #(strictly fewer followers) / n`.
pub fn assign_tiers(accounts: &BTreeMap<String, u64>) -> Result<TierPartition> {
    let n = accounts.len();
    if n == 0 {
        return Err(Error::InvalidInput("no accounts to tier".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "tiering needs at least 3 accounts, got {n}"
        )));
    }
    if n < 10 {
        log::warn!("only {n} accounts; tier boundaries are coarse");
    }
    let mut sorted: Vec<u64> = accounts.values().copied().collect();
    sorted.sort_unstable();
    let mut assignments = BTreeMap::new();
    let mut percentiles = BTreeMap::new();
    let mut followers: BTreeMap<Tier, Vec<f64>> = BTreeMap::new();
    for (id, &f) in accounts {
        let below = sorted.partition_point(|&x| x < f);
        let pct = 100.0 * below as f64 / n as f64;
        let tier = Tier::from_percentile(pct);
        assignments.insert(id.clone(), tier);
        percentiles.insert(id.clone(), pct);
        followers.entry(tier).or_default().push(f as f64);
    }
    let summaries = Tier::ALL
        .iter()
        .map(|&tier| {
            let xs = followers.get(&tier).map(Vec::as_slice).unwrap_or(&[]);
            TierSummary {
                tier,
                accounts: xs.len(),
                follower_mean: (!xs.is_empty()).then(|| mean(xs)),
                follower_sd: sample_sd(xs),
            }
        })
        .collect();
    let groups: Vec<Vec<f64>> = Tier::ALL
        .iter()
        .filter_map(|t| followers.get(t).cloned())
        .collect();
    let (anova, anova_note) = if groups.len() < 2 {
        (None, Some("fewer than two populated tiers".to_string()))
    } else {
        match anova_f(&groups) {
            Ok(a) => (Some(a), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    if let Some(note) = &anova_note {
        log::warn!("tier ANOVA undefined: {note}");
    }
    Ok(TierPartition {
        assignments,
        percentiles,
        summaries,
        anova,
        anova_note,
    })
}

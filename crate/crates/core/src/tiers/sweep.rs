use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::partition::{Tier, TierPartition};
use crate::corpus::{Indicator, MessageRecord};
use crate::error::{Error, Result};
use crate::stats::{
    dunn_posthoc, kruskal_wallis, mean, sample_sd, Adjustment, PairwiseTestResult, RankTestResult,
};
use crate::synergy::{
    extremes_table, sort_effects, sweep_scoped, BaselinePredicate, CellStyle, CombinationEffect,
    ExtremesRow, SweepParams,
};

/// How the significance floor applies inside a tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinNScaling {
    /// Same `min_n` in every tier.
    #[default]
    Fixed,
    /// `min_n` scaled by the tier's share of records, rounded up.
    Proportional,
}

pub type TierEffects = BTreeMap<Tier, Vec<CombinationEffect>>;

pub fn tier_records<'a>(
    records: &'a [MessageRecord],
    partition: &TierPartition,
) -> Result<BTreeMap<Tier, Vec<&'a MessageRecord>>> {
    let mut out: BTreeMap<Tier, Vec<&MessageRecord>> =
        Tier::ALL.iter().map(|&t| (t, Vec::new())).collect();
    for r in records {
        let tier = partition.tier_of(&r.account_id).ok_or_else(|| {
            Error::InvalidInput(format!("account {:?} has no tier", r.account_id))
        })?;
        out.get_mut(&tier).expect("all tiers present").push(r);
    }
    Ok(out)
}

/// Independent synergy sweeps over each tier's records.
pub fn tier_sweep(
    records: &[MessageRecord],
    partition: &TierPartition,
    baselines: &[BaselinePredicate],
    indicators: &[Indicator],
    params: &SweepParams,
    scaling: MinNScaling,
) -> Result<TierEffects> {
    let by_tier = tier_records(records, partition)?;
    let total = records.len().max(1);
    let owned: BTreeMap<Tier, Vec<MessageRecord>> = by_tier
        .into_iter()
        .map(|(t, rs)| (t, rs.into_iter().cloned().collect()))
        .collect();
    let jobs: Vec<(Tier, &BaselinePredicate)> = Tier::ALL
        .iter()
        .flat_map(|&t| baselines.iter().map(move |b| (t, b)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(tier, baseline)| {
            let subset = &owned[&tier];
            let mut p = params.clone();
            if scaling == MinNScaling::Proportional {
                p.min_n = (params.min_n * subset.len()).div_ceil(total);
            }
            let scope = format!("tier/{tier}");
            sweep_scoped(subset, baseline, indicators, &p, &scope).map(|e| (tier, e))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out: TierEffects = Tier::ALL.iter().map(|&t| (t, Vec::new())).collect();
    for (tier, effects) in results {
        out.get_mut(&tier)
            .expect("all tiers present")
            .extend(effects);
    }
    for effects in out.values_mut() {
        sort_effects(effects);
    }
    Ok(out)
}

/// Best combinations per pattern and tier, in `"Met + Narr (1.34)"` cells.
pub fn tier_table(
    effects: &TierEffects,
    patterns: &[String],
    indicators: &[Indicator],
    top: usize,
) -> Vec<ExtremesRow> {
    let mut rows = Vec::new();
    for pattern in patterns {
        for tier in Tier::ALL {
            let tier_effects = effects.get(&tier).map(Vec::as_slice).unwrap_or(&[]);
            let positive = extremes_table(
                tier_effects,
                std::slice::from_ref(pattern),
                tier.name(),
                indicators,
                top,
                CellStyle::Spaced,
            );
            rows.extend(positive.into_iter().take(1));
        }
    }
    rows
}

pub fn write_tier_table_csv<W: Write>(
    rows: &[ExtremesRow],
    indicators: &[Indicator],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["pattern".to_string(), "tier".to_string()];
    header.extend(indicators.iter().map(|i| i.to_string()));
    w.write_record(&header)?;
    for row in rows {
        let mut fields = vec![row.pattern.clone(), row.group.clone()];
        fields.extend((0..row.cells.len()).map(|i| row.cell_text(i)));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSizes {
    pub tier: Tier,
    /// `|S|` of each significant combination.
    pub sizes: Vec<usize>,
    pub count: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub min: Option<usize>,
    pub max: Option<usize>,
}

impl TierSizes {
    pub fn new(tier: Tier, mut sizes: Vec<usize>) -> Self {
        sizes.sort_unstable();
        let xs: Vec<f64> = sizes.iter().map(|&k| k as f64).collect();
        TierSizes {
            tier,
            count: sizes.len(),
            mean: (!xs.is_empty()).then(|| mean(&xs)),
            sd: sample_sd(&xs),
            min: sizes.first().copied(),
            max: sizes.last().copied(),
            sizes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierComplexityStats {
    /// Middle, Top, Bottom: the row order of the complexity table.
    pub tiers: Vec<TierSizes>,
    /// Tiers entering the rank tests, in the order of their group indices.
    pub tested: Vec<Tier>,
    pub kw: Option<RankTestResult>,
    pub dunn: Option<PairwiseTestResult>,
}

pub const COMPLEXITY_ORDER: [Tier; 3] = [Tier::Middle, Tier::Top, Tier::Bottom];

/// Sizes of significant combinations per tier, compared with Kruskal–Wallis
/// and Dunn.
pub fn complexity_comparison(
    effects: &TierEffects,
    adjustment: Adjustment,
) -> Result<TierComplexityStats> {
    let tiers: Vec<TierSizes> = COMPLEXITY_ORDER
        .iter()
        .map(|t| {
            let sizes = effects
                .get(t)
                .map(|es| es.iter().filter(|e| e.significant).map(|e| e.k()).collect())
                .unwrap_or_default();
            TierSizes::new(*t, sizes)
        })
        .collect();
    complexity_from_sizes(tiers, adjustment)
}

pub fn complexity_from_sizes(
    tiers: Vec<TierSizes>,
    adjustment: Adjustment,
) -> Result<TierComplexityStats> {
    if tiers.iter().all(|t| t.count == 0) {
        return Err(Error::InvalidInput(
            "no tier has a significant combination".into(),
        ));
    }
    let populated: Vec<&TierSizes> = tiers.iter().filter(|t| t.count > 0).collect();
    let tested: Vec<Tier> = populated.iter().map(|t| t.tier).collect();
    let (kw, dunn) = if populated.len() < 2 {
        log::warn!("fewer than two tiers with significant combinations; rank tests skipped");
        (None, None)
    } else {
        let groups: Vec<Vec<f64>> = populated
            .iter()
            .map(|t| t.sizes.iter().map(|&k| k as f64).collect())
            .collect();
        (
            Some(kruskal_wallis(&groups)?),
            Some(dunn_posthoc(&groups, adjustment)?),
        )
    };
    Ok(TierComplexityStats {
        tiers,
        tested,
        kw,
        dunn,
    })
}

fn format_p(p: f64) -> String {
    if p >= 0.01 {
        format!("{p:.2}")
    } else {
        format!("{p:.3}")
    }
}

impl TierComplexityStats {
    /// `"Mid-Head: 0.03; Mid-Tail: 0.38"`: adjusted Dunn p-values of the pairs
    /// whose first member is `tier`.
    pub fn dunn_cell(&self, tier: Tier) -> String {
        let Some(dunn) = &self.dunn else {
            return crate::synergy::EMPTY_CELL.to_string();
        };
        let parts: Vec<String> = dunn
            .pairs
            .iter()
            .filter(|p| self.tested[p.group_a] == tier)
            .map(|p| {
                format!(
                    "{}-{}: {}",
                    self.tested[p.group_a].short(),
                    self.tested[p.group_b].short(),
                    format_p(p.p_adjusted)
                )
            })
            .collect();
        if parts.is_empty() {
            crate::synergy::EMPTY_CELL.to_string()
        } else {
            parts.join("; ")
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["level", "count", "mean", "sd", "min", "max", "dunn_p"])?;
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_default();
        let opt_u = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        for t in &self.tiers {
            w.write_record([
                t.tier.short().to_string(),
                t.count.to_string(),
                opt(t.mean),
                opt(t.sd),
                opt_u(t.min),
                opt_u(t.max),
                self.dunn_cell(t.tier),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rank tests with tier names in place of group indices.
    pub fn tests_json(&self) -> Result<String> {
        let pairs: Vec<serde_json::Value> = self
            .dunn
            .iter()
            .flat_map(|d| d.pairs.iter())
            .map(|p| {
                serde_json::json!({
                    "a": self.tested[p.group_a],
                    "b": self.tested[p.group_b],
                    "z": p.z_statistic,
                    "p_raw": p.p_raw,
                    "p_adjusted": p.p_adjusted,
                })
            })
            .collect();
        let value = serde_json::json!({
            "tiers": self.tested,
            "kruskal_wallis": self.kw,
            "dunn": {
                "adjustment": self.dunn.as_ref().map(|d| d.adjustment),
                "pairs": pairs,
            },
        });
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

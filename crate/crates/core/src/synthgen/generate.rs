use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::{prototype_frame, FlipMode, GeneratorSpec};
use crate::cluster::NOISE;
use crate::corpus::{decode_features, CategorySet, FeatureVector, Indicator, MessageRecord};
use crate::error::Result;
use crate::rng::{indexed_stream, stream};
use crate::tiers::{assign_tiers, Tier};

pub const TRUTH_FORMAT: &str = "safecomb-synthetic-truth";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub id: String,
    /// Population index, or -1 for uniform records.
    pub population: i32,
    pub flipped: bool,
    pub tier: Tier,
    /// Indices into the planted effect list that apply to this record.
    pub effects: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub format: String,
    pub spec: GeneratorSpec,
    pub accounts: BTreeMap<String, Tier>,
    pub records: Vec<TruthRecord>,
    /// Records affected by each planted effect.
    pub effect_counts: Vec<usize>,
}

impl GroundTruth {
    /// Planted labels in record order (uniform records are -1).
    pub fn labels(&self) -> Vec<i32> {
        self.records.iter().map(|r| r.population).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<GroundTruth> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub records: Vec<MessageRecord>,
    pub truth: GroundTruth,
}

pub fn account_id(j: usize) -> String {
    format!("acct{j:04}")
}

fn perturb(bits: u32, spec: &GeneratorSpec, rng: &mut impl Rng) -> u32 {
    match spec.flip_mode {
        FlipMode::Record => {
            if spec.flip_rate > 0.0 && rng.random_bool(spec.flip_rate) {
                bits ^ 1 << rng.random_range(0..crate::corpus::CATEGORY_COUNT)
            } else {
                bits
            }
        }
        FlipMode::Slot => {
            let mut out = bits;
            for slot in 0..crate::corpus::CATEGORY_COUNT {
                if spec.flip_rate > 0.0 && rng.random_bool(spec.flip_rate) {
                    out ^= 1 << slot;
                }
            }
            out
        }
    }
}

fn draw_count(mu: f64, normal: &Normal<f64>, rng: &mut impl Rng) -> u64 {
    let x = (mu + normal.sample(rng)).exp() - 1.0;
    if x.is_finite() {
        x.round().max(0.0) as u64
    } else {
        u64::MAX
    }
}

/// Generate records and their ground truth. Deterministic in `spec.seed`;
/// records are drawn from per-index streams.
pub fn generate(spec: &GeneratorSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let seed = spec.seed;

    let mut follower_rng = stream(seed, "synthgen/followers");
    let follower_dist = Normal::new(spec.followers.mu, spec.followers.sigma)
        .map_err(|e| crate::Error::Config(e.to_string()))?;
    let followers: BTreeMap<String, u64> = (0..spec.accounts)
        .map(|j| {
            let f = follower_dist
                .sample(&mut follower_rng)
                .exp()
                .round()
                .max(0.0) as u64;
            (account_id(j), f)
        })
        .collect();
    let partition = assign_tiers(&followers)?;

    let prototypes: Vec<FeatureVector> = spec
        .populations
        .iter()
        .map(|p| p.vector())
        .collect::<Result<_>>()?;
    let mut plan: Vec<i32> = Vec::with_capacity(spec.total_records());
    for (k, p) in spec.populations.iter().enumerate() {
        plan.extend(std::iter::repeat_n(k as i32, p.size));
    }
    plan.extend(std::iter::repeat_n(NOISE, spec.uniform_records));

    let effects: Vec<_> = spec
        .effects
        .iter()
        .map(|e| (spec.baseline(&e.baseline).expect("validated"), e))
        .collect();
    let noise: Vec<Normal<f64>> = Indicator::ALL
        .iter()
        .map(|&i| Normal::new(0.0, spec.engagement.get(i).sigma).expect("validated sigma"))
        .collect();

    let rows: Vec<(MessageRecord, TruthRecord)> = plan
        .par_iter()
        .enumerate()
        .map(|(i, &population)| {
            let mut rng = indexed_stream(seed, "synthgen/record", i as u64);
            let (vector, flipped) = if population == NOISE {
                let bits = rng.random::<u32>() & CategorySet::FULL.bits();
                (FeatureVector::repair(bits, None), false)
            } else {
                let proto = prototypes[population as usize];
                let bits = perturb(proto.bits(), spec, &mut rng);
                let v = FeatureVector::repair(bits, prototype_frame(proto));
                (v, v != proto)
            };
            let account = i % spec.accounts;
            let account_name = account_id(account);
            let tier = partition
                .tier_of(&account_name)
                .expect("every account tiered");
            let mut shift = [0.0f64; 3];
            let mut applied = Vec::new();
            for (idx, (baseline, e)) in effects.iter().enumerate() {
                let hit = baseline.matches(vector)
                    && vector.set().is_superset(e.combination)
                    && e.tier.is_none_or(|t| t == tier);
                if hit {
                    let slot = Indicator::ALL
                        .iter()
                        .position(|x| *x == e.indicator)
                        .expect("indicator");
                    shift[slot] += e.beta;
                    applied.push(idx);
                }
            }
            let counts: Vec<u64> = Indicator::ALL
                .iter()
                .enumerate()
                .map(|(s, &ind)| {
                    draw_count(spec.engagement.get(ind).mu + shift[s], &noise[s], &mut rng)
                })
                .collect();
            let labels = decode_features(vector);
            let id = format!("syn{i:07}");
            let record = MessageRecord {
                id: id.clone(),
                account_id: account_name,
                followers: followers[&account_id(account)],
                likes: counts[0],
                comments: counts[1],
                shares: counts[2],
                source: labels.source,
                appeal: labels.appeal,
                frame: labels.frame,
                evidence: labels.evidence,
            };
            let truth = TruthRecord {
                id,
                population,
                flipped,
                tier,
                effects: applied,
            };
            (record, truth)
        })
        .collect();

    let mut effect_counts = vec![0usize; spec.effects.len()];
    for (_, t) in &rows {
        for &e in &t.effects {
            effect_counts[e] += 1;
        }
    }
    let (records, truth_rows): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(SyntheticCorpus {
        records,
        truth: GroundTruth {
            format: TRUTH_FORMAT.to_string(),
            spec: spec.clone(),
            accounts: partition.assignments,
            records: truth_rows,
            effect_counts,
        },
    })
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{is_consistent, BaselinePredicate};
use crate::corpus::{CategorySet, Indicator, MessageRecord};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::stats::{bootstrap_ci, mean_log_diff, BootstrapCI, DEFAULT_LEVEL, DEFAULT_RESAMPLES};

pub const DEFAULT_MIN_N: usize = 300;
pub const DEFAULT_K_MAX: usize = 4;
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Which baseline records form the comparison group for `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WithoutRule {
    /// Records lacking at least one element of `S`.
    #[default]
    Complement,
    /// Records carrying no element of `S`.
    NoneOf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepParams {
    pub k_max: usize,
    pub min_n: usize,
    pub resamples: usize,
    pub level: f64,
    pub seed: u64,
    pub without: WithoutRule,
    /// Refuse sweeps where C(universe, k_max) exceeds this.
    pub budget: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            k_max: DEFAULT_K_MAX,
            min_n: DEFAULT_MIN_N,
            resamples: DEFAULT_RESAMPLES,
            level: DEFAULT_LEVEL,
            seed: 0,
            without: WithoutRule::Complement,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl SweepParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 1 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        if self.resamples < 1 {
            return Err(Error::Config("resamples must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        Ok(())
    }
}

/// Text layout of report cells: `Met+Narr (1.097)` or `Met + Narr (1.10)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStyle {
    #[default]
    Compact,
    Spaced,
}

impl CellStyle {
    pub fn separator(self) -> &'static str {
        match self {
            CellStyle::Compact => "+",
            CellStyle::Spaced => " + ",
        }
    }

    pub fn decimals(self) -> usize {
        match self {
            CellStyle::Compact => 3,
            CellStyle::Spaced => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationEffect {
    pub pattern: String,
    pub combination: CategorySet,
    pub indicator: Indicator,
    pub n_with: usize,
    pub n_without: usize,
    /// `None` when either group is empty.
    pub delta_e: Option<f64>,
    /// `None` when either group is empty or `n_with <= min_n`.
    pub ci: Option<BootstrapCI>,
    pub significant: bool,
}

impl CombinationEffect {
    pub fn k(&self) -> usize {
        self.combination.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.delta_e.is_none()
    }

    /// `"Met+Util+Narr (1.097)"`-style cell text.
    pub fn cell(&self) -> String {
        self.cell_styled(CellStyle::Compact)
    }

    pub fn cell_styled(&self, style: CellStyle) -> String {
        let codes = self.combination.join_codes(style.separator());
        match self.delta_e {
            Some(d) => format!("{codes} ({d:.*})", style.decimals()),
            None => format!("{codes} (n/a)"),
        }
    }
}

/// Feature bits and log-scale engagement of the records satisfying one baseline.
pub struct BaselineData<'a> {
    pub baseline: &'a BaselinePredicate,
    bits: Vec<u32>,
    logs: [Vec<f64>; 3],
}

impl<'a> BaselineData<'a> {
    pub fn new(baseline: &'a BaselinePredicate, records: &[MessageRecord]) -> Self {
        let mut bits = Vec::new();
        let mut logs: [Vec<f64>; 3] = Default::default();
        for r in records {
            let v = r.features();
            if baseline.matches(v) {
                bits.push(v.bits());
                let e = r.engagement();
                for (i, ind) in Indicator::ALL.iter().enumerate() {
                    logs[i].push(e.get(*ind));
                }
            }
        }
        BaselineData {
            baseline,
            bits,
            logs,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    fn split(
        &self,
        s: CategorySet,
        indicator: Indicator,
        rule: WithoutRule,
    ) -> (Vec<f64>, Vec<f64>) {
        let mask = s.bits();
        let values = &self.logs[indicator_index(indicator)];
        let mut with = Vec::new();
        let mut without = Vec::new();
        for (&b, &x) in self.bits.iter().zip(values) {
            if b & mask == mask {
                with.push(x);
            } else if rule == WithoutRule::Complement || b & mask == 0 {
                without.push(x);
            }
        }
        (with, without)
    }
}

fn indicator_index(indicator: Indicator) -> usize {
    Indicator::ALL
        .iter()
        .position(|i| *i == indicator)
        .expect("known indicator")
}

/// Stable stream key of one combination.
pub fn combination_key(scope: &str, pattern: &str, s: CategorySet, indicator: Indicator) -> String {
    format!(
        "synergy/{scope}/{pattern}/{}/{}",
        s.join_codes("+"),
        indicator.name()
    )
}

pub fn evaluate_combination(
    data: &BaselineData<'_>,
    s: CategorySet,
    indicator: Indicator,
    params: &SweepParams,
    scope: &str,
) -> Result<CombinationEffect> {
    if s.is_empty() {
        return Err(Error::InvalidInput("empty combination".into()));
    }
    let universe = data.baseline.peripheral_universe();
    if !universe.is_superset(s) {
        return Err(Error::InvalidInput(format!(
            "{s} is not within the peripheral universe of {}",
            data.baseline.name
        )));
    }
    if !is_consistent(s) {
        return Err(Error::InvalidInput(format!(
            "{s} is not a consistent combination"
        )));
    }
    let (with, without) = data.split(s, indicator, params.without);
    let pattern = data.baseline.name.clone();
    let mut effect = CombinationEffect {
        pattern,
        combination: s,
        indicator,
        n_with: with.len(),
        n_without: without.len(),
        delta_e: None,
        ci: None,
        significant: false,
    };
    if with.is_empty() || without.is_empty() {
        return Ok(effect);
    }
    effect.delta_e = Some(mean_log_diff(&with, &without)?);
    // Too small to qualify either way, so the interval is not drawn.
    if effect.n_with <= params.min_n {
        return Ok(effect);
    }
    let seed = derive_seed(
        params.seed,
        &combination_key(scope, &effect.pattern, s, indicator),
    );
    let ci = bootstrap_ci(&with, &without, params.resamples, params.level, seed)?;
    effect.significant = ci.excludes_zero();
    effect.ci = Some(ci);
    Ok(effect)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Consistent subsets of `universe` with 1..=k_max elements, by size then
/// slot order.
pub fn enumerate_combinations(universe: CategorySet, k_max: usize) -> Vec<CategorySet> {
    let cats: Vec<_> = universe.iter().collect();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, CategorySet)> = vec![(0, CategorySet::EMPTY)];
    while let Some((next, set)) = stack.pop() {
        for (i, &c) in cats.iter().enumerate().skip(next) {
            let grown = set.with(c);
            if !is_consistent(grown) {
                continue;
            }
            out.push(grown);
            if grown.len() < k_max {
                stack.push((i + 1, grown));
            }
        }
    }
    out.sort_by_key(|s| (s.len(), s.iter().map(|c| c.slot()).collect::<Vec<_>>()));
    out
}

/// Every consistent combination of up to `k_max` peripheral categories on
/// every indicator, sorted by indicator then descending ΔE (degenerate
/// effects last).
pub fn sweep(
    records: &[MessageRecord],
    baseline: &BaselinePredicate,
    indicators: &[Indicator],
    params: &SweepParams,
) -> Result<Vec<CombinationEffect>> {
    sweep_scoped(records, baseline, indicators, params, "all")
}

pub fn sweep_scoped(
    records: &[MessageRecord],
    baseline: &BaselinePredicate,
    indicators: &[Indicator],
    params: &SweepParams,
    scope: &str,
) -> Result<Vec<CombinationEffect>> {
    params.validate()?;
    baseline.validate()?;
    let universe = baseline.peripheral_universe();
    let u = universe.len() as u128;
    let candidates = binomial(u, params.k_max as u128);
    if candidates > u128::from(params.budget) {
        return Err(Error::Budget {
            candidates,
            cap: u128::from(params.budget),
        });
    }
    let combos = enumerate_combinations(universe, params.k_max);
    let data = BaselineData::new(baseline, records);
    log::info!(
        "{scope}/{}: {} baseline records, {} combinations",
        baseline.name,
        data.len(),
        combos.len()
    );
    let jobs: Vec<(Indicator, CategorySet)> = indicators
        .iter()
        .flat_map(|&ind| combos.iter().map(move |&s| (ind, s)))
        .collect();
    let mut effects = jobs
        .par_iter()
        .map(|&(ind, s)| evaluate_combination(&data, s, ind, params, scope))
        .collect::<Result<Vec<_>>>()?;
    sort_effects(&mut effects);
    Ok(effects)
}

pub fn sort_effects(effects: &mut [CombinationEffect]) {
    effects.sort_by(|a, b| {
        a.pattern
            .cmp(&b.pattern)
            .then(a.indicator.cmp(&b.indicator))
            .then(match (a.delta_e, b.delta_e) {
                (Some(x), Some(y)) => y.total_cmp(&x),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
            .then(a.k().cmp(&b.k()))
            .then(a.combination.bits().cmp(&b.combination.bits()))
    });
}

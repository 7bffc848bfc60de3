use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::effect::CombinationEffect;
use crate::corpus::Indicator;
use crate::error::Result;
use crate::stats::{mean, std_error};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub pattern: String,
    pub indicator: Indicator,
    pub k: usize,
    pub mean_delta_e: f64,
    pub count: usize,
    /// `None` for a single contributing effect.
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCurve {
    pub points: Vec<CurvePoint>,
}

impl ComplexityCurve {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points of one pattern and indicator, ascending in `k`.
    pub fn series(&self, pattern: &str, indicator: Indicator) -> Vec<&CurvePoint> {
        self.points
            .iter()
            .filter(|p| p.pattern == pattern && p.indicator == indicator)
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "pattern",
            "indicator",
            "k",
            "mean_delta_e",
            "count",
            "stderr",
        ])?;
        for p in &self.points {
            w.write_record([
                p.pattern.clone(),
                p.indicator.to_string(),
                p.k.to_string(),
                p.mean_delta_e.to_string(),
                p.count.to_string(),
                p.stderr.map(|s| s.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Mean ΔE of significant effects grouped by pattern, indicator and `|S|`.
pub fn complexity_curve(effects: &[CombinationEffect]) -> ComplexityCurve {
    let mut groups: BTreeMap<(String, Indicator, usize), Vec<f64>> = BTreeMap::new();
    for e in effects {
        if let (true, Some(d)) = (e.significant, e.delta_e) {
            groups
                .entry((e.pattern.clone(), e.indicator, e.k()))
                .or_default()
                .push(d);
        }
    }
    if groups.is_empty() && !effects.is_empty() {
        log::warn!("no significant combinations; complexity curve is empty");
    }
    let points = groups
        .into_iter()
        .map(|((pattern, indicator, k), values)| CurvePoint {
            pattern,
            indicator,
            k,
            mean_delta_e: mean(&values),
            count: values.len(),
            stderr: std_error(&values),
        })
        .collect();
    ComplexityCurve { points }
}

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::effect::{CellStyle, CombinationEffect};
use crate::corpus::Indicator;
use crate::error::Result;

pub const DEFAULT_TOP: usize = 2;
pub const EMPTY_CELL: &str = "–";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn label(self) -> &'static str {
        match self {
            Polarity::Positive => "Positive",
            Polarity::Negative => "Negative",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremesRow {
    pub pattern: String,
    /// Tier or other sub-population label; empty for whole-corpus tables.
    pub group: String,
    pub polarity: Polarity,
    /// One cell per requested indicator, in request order.
    pub cells: Vec<Vec<CombinationEffect>>,
    pub style: CellStyle,
}

impl ExtremesRow {
    pub fn cell_text(&self, i: usize) -> String {
        format_cell(&self.cells[i], self.style)
    }
}

pub fn format_cell(effects: &[CombinationEffect], style: CellStyle) -> String {
    if effects.is_empty() {
        return EMPTY_CELL.to_string();
    }
    effects
        .iter()
        .map(|e| e.cell_styled(style))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Strongest significant positive and negative effects of one indicator.
pub fn extremes(
    effects: &[CombinationEffect],
    pattern: &str,
    indicator: Indicator,
    polarity: Polarity,
    top: usize,
) -> Vec<CombinationEffect> {
    let mut picked: Vec<&CombinationEffect> = effects
        .iter()
        .filter(|e| e.pattern == pattern && e.indicator == indicator && e.significant)
        .filter(|e| match (polarity, e.delta_e) {
            (Polarity::Positive, Some(d)) => d > 0.0,
            (Polarity::Negative, Some(d)) => d < 0.0,
            _ => false,
        })
        .collect();
    picked.sort_by(|a, b| {
        let (x, y) = (a.delta_e.unwrap_or(0.0), b.delta_e.unwrap_or(0.0));
        let ord = match polarity {
            Polarity::Positive => y.total_cmp(&x),
            Polarity::Negative => x.total_cmp(&y),
        };
        ord.then(a.k().cmp(&b.k()))
            .then(a.combination.bits().cmp(&b.combination.bits()))
    });
    picked.into_iter().take(top).cloned().collect()
}

/// Positive and negative rows for each pattern, one cell per indicator.
pub fn extremes_table(
    effects: &[CombinationEffect],
    patterns: &[String],
    group: &str,
    indicators: &[Indicator],
    top: usize,
    style: CellStyle,
) -> Vec<ExtremesRow> {
    let mut rows = Vec::new();
    for pattern in patterns {
        for polarity in [Polarity::Positive, Polarity::Negative] {
            let cells = indicators
                .iter()
                .map(|&ind| extremes(effects, pattern, ind, polarity, top))
                .collect();
            rows.push(ExtremesRow {
                pattern: pattern.clone(),
                group: group.to_string(),
                polarity,
                cells,
                style,
            });
        }
    }
    rows
}

pub fn write_extremes_csv<W: Write>(
    rows: &[ExtremesRow],
    indicators: &[Indicator],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let with_group = rows.iter().any(|r| !r.group.is_empty());
    let mut header = vec!["pattern".to_string()];
    if with_group {
        header.push("group".into());
    }
    header.push("polarity".into());
    header.extend(indicators.iter().map(|i| i.to_string()));
    w.write_record(&header)?;
    for row in rows {
        let mut fields = vec![row.pattern.clone()];
        if with_group {
            fields.push(row.group.clone());
        }
        fields.push(row.polarity.label().to_string());
        fields.extend((0..row.cells.len()).map(|i| row.cell_text(i)));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_effects_csv<W: Write>(effects: &[CombinationEffect], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "pattern",
        "combination",
        "indicator",
        "k",
        "n_with",
        "n_without",
        "delta_e",
        "ci_lo",
        "ci_hi",
        "significant",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for e in effects {
        w.write_record([
            e.pattern.clone(),
            e.combination.join_codes("+"),
            e.indicator.to_string(),
            e.k().to_string(),
            e.n_with.to_string(),
            e.n_without.to_string(),
            opt(e.delta_e),
            opt(e.ci.map(|c| c.lo)),
            opt(e.ci.map(|c| c.hi)),
            e.significant.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

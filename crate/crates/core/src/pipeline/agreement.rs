use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{parse_labels_str, CategorySet, CorpusFormat, Dimension, LabelRow};
use crate::error::{Error, Result};
use crate::stats::{cohen_kappa, AgreementResult};

const DIMENSIONS: [Dimension; 4] = [
    Dimension::Source,
    Dimension::Appeal,
    Dimension::Frame,
    Dimension::Evidence,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionAgreement {
    pub dimension: Dimension,
    pub result: AgreementResult,
}

/// Coder agreement per dimension (whole label set as one value), pooled over
/// dimensions, and flattened to per-category presence decisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub items: usize,
    pub dimensions: Vec<DimensionAgreement>,
    pub pooled: AgreementResult,
    pub categories: AgreementResult,
}

impl AgreementReport {
    /// `"κ = 0.78; accuracy ≈ 83.5%"` for the pooled comparison.
    pub fn headline(&self) -> String {
        format!(
            "κ = {:.2}; accuracy ≈ {:.1}%",
            self.pooled.kappa,
            100.0 * self.pooled.accuracy
        )
    }
}

fn index(rows: Vec<LabelRow>, which: &str) -> Result<BTreeMap<String, [CategorySet; 4]>> {
    let mut out = BTreeMap::new();
    for r in rows {
        if out.insert(r.id.clone(), r.dimensions).is_some() {
            return Err(Error::Validation(format!(
                "{which}: duplicate id {:?}",
                r.id
            )));
        }
    }
    Ok(out)
}

pub fn compare_labels(a: Vec<LabelRow>, b: Vec<LabelRow>) -> Result<AgreementReport> {
    let a = index(a, "labels_a")?;
    let b = index(b, "labels_b")?;
    let only_a: Vec<&String> = a.keys().filter(|k| !b.contains_key(*k)).collect();
    let only_b: Vec<&String> = b.keys().filter(|k| !a.contains_key(*k)).collect();
    if !only_a.is_empty() || !only_b.is_empty() {
        let show = |v: &[&String]| {
            v.iter()
                .take(5)
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        return Err(Error::Validation(format!(
            "label files cover different ids: {} only in labels_a [{}], {} only in labels_b [{}]",
            only_a.len(),
            show(&only_a),
            only_b.len(),
            show(&only_b)
        )));
    }
    if a.is_empty() {
        return Err(Error::Validation("label files are empty".into()));
    }
    let pairs: Vec<(&[CategorySet; 4], &[CategorySet; 4])> =
        a.iter().map(|(id, x)| (x, &b[id])).collect();
    let mut dimensions = Vec::new();
    let mut pooled_a = Vec::new();
    let mut pooled_b = Vec::new();
    for (d, dim) in DIMENSIONS.iter().enumerate() {
        let xs: Vec<CategorySet> = pairs.iter().map(|(x, _)| x[d]).collect();
        let ys: Vec<CategorySet> = pairs.iter().map(|(_, y)| y[d]).collect();
        dimensions.push(DimensionAgreement {
            dimension: *dim,
            result: cohen_kappa(&xs, &ys)?,
        });
        pooled_a.extend(xs.iter().map(|s| (d, *s)));
        pooled_b.extend(ys.iter().map(|s| (d, *s)));
    }
    let mut flat_a = Vec::new();
    let mut flat_b = Vec::new();
    for (x, y) in &pairs {
        let (ux, uy) = (
            x.iter().fold(CategorySet::EMPTY, |acc, s| acc.union(*s)),
            y.iter().fold(CategorySet::EMPTY, |acc, s| acc.union(*s)),
        );
        for c in CategorySet::FULL.iter() {
            flat_a.push((c, ux.contains(c)));
            flat_b.push((c, uy.contains(c)));
        }
    }
    Ok(AgreementReport {
        items: pairs.len(),
        dimensions,
        pooled: cohen_kappa(&pooled_a, &pooled_b)?,
        categories: cohen_kappa(&flat_a, &flat_b)?,
    })
}

fn read_labels(path: &Path) -> Result<Vec<LabelRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (rows, report) = parse_labels_str(&text, CorpusFormat::from_path(path))?;
    if let Some(first) = report.rejections.first() {
        return Err(Error::Validation(format!(
            "{}: {} rejected rows (line {}: {})",
            path.display(),
            report.rejected,
            first.line,
            first.reason
        )));
    }
    Ok(rows)
}

pub fn agreement_files(labels_a: &Path, labels_b: &Path) -> Result<AgreementReport> {
    compare_labels(read_labels(labels_a)?, read_labels(labels_b)?)
}

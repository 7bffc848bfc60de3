//! Coder label files for agreement checks: one row per post with `id` and the
//! four SAFE dimensions. Engagement columns, if present, are ignored.

use serde::Deserialize;

use super::reader::{build_dimensions, CorpusFormat, ParseReport, RowIssue};
use super::taxonomy::CategorySet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRow {
    pub id: String,
    /// Source, Appeal, Frame, Evidence.
    pub dimensions: [CategorySet; 4],
}

#[derive(Deserialize)]
struct JsonLabels {
    id: String,
    #[serde(default)]
    source: Vec<String>,
    #[serde(default)]
    appeal: Vec<String>,
    #[serde(default)]
    frame: Option<serde_json::Value>,
    #[serde(default)]
    evidence: Vec<String>,
}

#[derive(Deserialize)]
struct CsvLabels {
    id: String,
    #[serde(default)]
    source: String,
    #[serde(default)]
    appeal: String,
    #[serde(default)]
    frame: String,
    #[serde(default)]
    evidence: String,
}

fn cell(s: &str) -> Vec<String> {
    s.split('|')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

fn frame_codes(v: Option<serde_json::Value>) -> std::result::Result<Vec<String>, String> {
    match v {
        None | Some(serde_json::Value::Null) => Ok(Vec::new()),
        Some(serde_json::Value::String(s)) => Ok(cell(&s)),
        Some(serde_json::Value::Array(items)) => items
            .into_iter()
            .map(|i| match i {
                serde_json::Value::String(s) => Ok(s),
                other => Err(format!(
                    "malformed row: frame entry {other} is not a string"
                )),
            })
            .collect(),
        Some(other) => Err(format!("malformed row: frame {other} is not a code")),
    }
}

fn accept(
    rows: &mut Vec<LabelRow>,
    report: &mut ParseReport,
    line: u64,
    id: String,
    dims: std::result::Result<[Vec<String>; 4], String>,
) {
    let built = dims.and_then(|[s, a, f, e]| build_dimensions(&s, &a, &f, &e, false));
    match built {
        Ok((dimensions, _)) if !id.trim().is_empty() => {
            report.accepted += 1;
            rows.push(LabelRow { id, dimensions });
        }
        Ok(_) => reject(report, line, None, "empty id".into()),
        Err(reason) => reject(report, line, Some(id), reason),
    }
}

fn reject(report: &mut ParseReport, line: u64, id: Option<String>, reason: String) {
    report.rejected += 1;
    report.rejections.push(RowIssue { line, id, reason });
}

pub fn parse_labels_str(text: &str, format: CorpusFormat) -> Result<(Vec<LabelRow>, ParseReport)> {
    let mut rows = Vec::new();
    let mut report = ParseReport::default();
    match format {
        CorpusFormat::Jsonl => {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let line_no = i as u64 + 1;
                match serde_json::from_str::<JsonLabels>(line) {
                    Err(e) => reject(&mut report, line_no, None, format!("malformed row: {e}")),
                    Ok(r) => {
                        let dims =
                            frame_codes(r.frame).map(|f| [r.source, r.appeal, f, r.evidence]);
                        accept(&mut rows, &mut report, line_no, r.id, dims);
                    }
                }
            }
        }
        CorpusFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            let headers = reader.headers()?.clone();
            if !headers.iter().any(|h| h == "id") {
                return Err(Error::InvalidInput(
                    "label file header lacks column \"id\"".into(),
                ));
            }
            for result in reader.records() {
                match result.and_then(|row| {
                    let line = row.position().map_or(0, |p| p.line());
                    row.deserialize::<CsvLabels>(Some(&headers))
                        .map(|r| (line, r))
                }) {
                    Err(e) => {
                        let line = e.position().map_or(0, |p| p.line());
                        reject(&mut report, line, None, format!("malformed row: {e}"));
                    }
                    Ok((line, r)) => {
                        let dims = Ok([
                            cell(&r.source),
                            cell(&r.appeal),
                            cell(&r.frame),
                            cell(&r.evidence),
                        ]);
                        accept(&mut rows, &mut report, line, r.id, dims);
                    }
                }
            }
        }
    }
    Ok((rows, report))
}

//! Corpus ingestion (JSONL and CSV) with per-row validation and a parse report.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::record::{check_dimension, MessageRecord, Violation};
use super::taxonomy::{Category, CategorySet, Dimension};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from a file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "json" | "ndjson" => Ok(CorpusFormat::Jsonl),
            "csv" => Ok(CorpusFormat::Csv),
            other => Err(Error::InvalidInput(format!(
                "unknown corpus format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReadOptions {
    /// Coerce an empty dimension to its absence marker instead of rejecting.
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowIssue {
    pub line: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseReport {
    pub accepted: usize,
    pub rejected: usize,
    pub rejections: Vec<RowIssue>,
    pub warnings: Vec<RowIssue>,
}

impl ParseReport {
    fn reject(&mut self, line: u64, id: Option<String>, reason: impl Into<String>) {
        self.rejected += 1;
        self.rejections.push(RowIssue {
            line,
            id,
            reason: reason.into(),
        });
    }
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub records: Vec<MessageRecord>,
    pub report: ParseReport,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<String> {
        match self {
            OneOrMany::One(s) if s.trim().is_empty() => Vec::new(),
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Deserialize)]
struct JsonRow {
    id: String,
    account_id: String,
    followers: u64,
    likes: u64,
    comments: u64,
    shares: u64,
    #[serde(default)]
    source: Vec<String>,
    #[serde(default)]
    appeal: Vec<String>,
    #[serde(default)]
    frame: Option<OneOrMany>,
    #[serde(default)]
    evidence: Vec<String>,
}

#[derive(Deserialize)]
struct CsvRow {
    id: String,
    account_id: String,
    followers: u64,
    likes: u64,
    comments: u64,
    shares: u64,
    #[serde(default)]
    source: String,
    #[serde(default)]
    appeal: String,
    #[serde(default)]
    frame: String,
    #[serde(default)]
    evidence: String,
}

fn split_cell(cell: &str) -> Vec<String> {
    cell.split('|')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

struct RawLabels {
    source: Vec<String>,
    appeal: Vec<String>,
    frame: Vec<String>,
    evidence: Vec<String>,
}

/// Per-dimension label parsing shared by the corpus and label-file readers.
/// Returns the four sets plus warnings for coerced dimensions.
pub(crate) fn build_dimensions(
    source: &[String],
    appeal: &[String],
    frame: &[String],
    evidence: &[String],
    lenient: bool,
) -> std::result::Result<([CategorySet; 4], Vec<String>), String> {
    let mut sets = [CategorySet::EMPTY; 4];
    let mut warnings = Vec::new();
    for (slot, (dim, codes)) in Dimension::ALL
        .into_iter()
        .zip([source, appeal, frame, evidence])
        .enumerate()
    {
        let mut set = CategorySet::EMPTY;
        for code in codes {
            let c = Category::from_str(code)
                .map_err(|_| format!("unknown category code {code:?} in {dim}"))?;
            set.insert(c);
        }
        if set.is_empty() && lenient {
            warnings.push(format!(
                "empty dimension: {dim}; coerced to {}",
                dim.absence_marker()
            ));
            set.insert(dim.absence_marker());
        }
        check_dimension(dim, set).map_err(|v: Violation| v.to_string())?;
        sets[slot] = set;
    }
    Ok((sets, warnings))
}

#[allow(clippy::too_many_arguments)]
fn build_record(
    id: String,
    account_id: String,
    followers: u64,
    likes: u64,
    comments: u64,
    shares: u64,
    raw: RawLabels,
    lenient: bool,
) -> std::result::Result<(MessageRecord, Vec<String>), String> {
    if id.trim().is_empty() {
        return Err("empty id".into());
    }
    let (sets, warnings) =
        build_dimensions(&raw.source, &raw.appeal, &raw.frame, &raw.evidence, lenient)?;
    let frame = sets[2].iter().next().expect("frame validated");
    let record = MessageRecord {
        id,
        account_id,
        followers,
        likes,
        comments,
        shares,
        source: sets[0],
        appeal: sets[1],
        frame,
        evidence: sets[3],
    };
    Ok((record, warnings))
}

struct Collector {
    opts: ReadOptions,
    records: Vec<MessageRecord>,
    report: ParseReport,
    seen: HashSet<String>,
}

impl Collector {
    fn new(opts: ReadOptions) -> Self {
        Collector {
            opts,
            records: Vec::new(),
            report: ParseReport::default(),
            seen: HashSet::new(),
        }
    }

    fn push(
        &mut self,
        line: u64,
        built: std::result::Result<(MessageRecord, Vec<String>), String>,
        id_hint: Option<String>,
    ) {
        match built {
            Err(reason) => self.report.reject(line, id_hint, reason),
            Ok((record, warnings)) => {
                if !self.seen.insert(record.id.clone()) {
                    self.report.reject(line, Some(record.id), "duplicate id");
                    return;
                }
                for w in warnings {
                    log::warn!("line {line}: {w}");
                    self.report.warnings.push(RowIssue {
                        line,
                        id: Some(record.id.clone()),
                        reason: w,
                    });
                }
                self.report.accepted += 1;
                self.records.push(record);
            }
        }
    }

    fn finish(self) -> Corpus {
        Corpus {
            records: self.records,
            report: self.report,
        }
    }
}

fn id_hint_json(line: &str) -> Option<String> {
    serde_json::from_str::<serde_json::Value>(line)
        .ok()?
        .get("id")?
        .as_str()
        .map(str::to_owned)
}

/// Parses JSONL text. Blank lines are skipped; malformed rows are rejected and
/// recorded with their 1-based line number.
pub fn parse_jsonl_str(text: &str, opts: ReadOptions) -> Corpus {
    let mut out = Collector::new(opts);
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let built = match serde_json::from_str::<JsonRow>(line) {
            Err(e) => Err(format!("malformed row: {e}")),
            Ok(row) => build_record(
                row.id,
                row.account_id,
                row.followers,
                row.likes,
                row.comments,
                row.shares,
                RawLabels {
                    source: row.source,
                    appeal: row.appeal,
                    frame: row.frame.map(OneOrMany::into_vec).unwrap_or_default(),
                    evidence: row.evidence,
                },
                out.opts.lenient,
            ),
        };
        let hint = if built.is_err() {
            id_hint_json(line)
        } else {
            None
        };
        out.push(line_no, built, hint);
    }
    out.finish()
}

/// Parses CSV text with a header row; multi-label cells are `|`-separated.
pub fn parse_csv_str(text: &str, opts: ReadOptions) -> Result<Corpus> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    for required in [
        "id",
        "account_id",
        "followers",
        "likes",
        "comments",
        "shares",
    ] {
        if !headers.iter().any(|h| h == required) {
            return Err(Error::InvalidInput(format!(
                "csv header lacks column {required:?}"
            )));
        }
    }
    let id_col = headers.iter().position(|h| h == "id");
    let mut out = Collector::new(opts);
    for result in reader.records() {
        let (line, built, hint) = match result {
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                (line, Err(format!("malformed row: {e}")), None)
            }
            Ok(row) => {
                let line = row.position().map_or(0, |p| p.line());
                let hint = id_col.and_then(|c| row.get(c)).map(str::to_owned);
                if row.len() != headers.len() {
                    (
                        line,
                        Err(format!(
                            "malformed row: expected {} fields, found {}",
                            headers.len(),
                            row.len()
                        )),
                        hint,
                    )
                } else {
                    let built = match row.deserialize::<CsvRow>(Some(&headers)) {
                        Err(e) => Err(format!("malformed row: {e}")),
                        Ok(r) => build_record(
                            r.id,
                            r.account_id,
                            r.followers,
                            r.likes,
                            r.comments,
                            r.shares,
                            RawLabels {
                                source: split_cell(&r.source),
                                appeal: split_cell(&r.appeal),
                                frame: split_cell(&r.frame),
                                evidence: split_cell(&r.evidence),
                            },
                            out.opts.lenient,
                        ),
                    };
                    (line, built, hint)
                }
            }
        };
        let hint = if built.is_err() { hint } else { None };
        out.push(line, built, hint);
    }
    Ok(out.finish())
}

pub fn parse_corpus_str(text: &str, format: CorpusFormat, opts: ReadOptions) -> Result<Corpus> {
    match format {
        CorpusFormat::Jsonl => Ok(parse_jsonl_str(text, opts)),
        CorpusFormat::Csv => parse_csv_str(text, opts),
    }
}

/// Reads and validates a corpus file. Row-level problems are collected in the
/// report; only an unreadable file or a broken CSV header is an error.
pub fn read_corpus(path: &Path, format: CorpusFormat, opts: ReadOptions) -> Result<Corpus> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes)
        .map_err(|e| Error::InvalidInput(format!("{} is not UTF-8: {e}", path.display())))?;
    parse_corpus_str(&text, format, opts)
}

#[derive(Serialize)]
struct JsonOut<'a> {
    id: &'a str,
    account_id: &'a str,
    followers: u64,
    likes: u64,
    comments: u64,
    shares: u64,
    source: Vec<&'static str>,
    appeal: Vec<&'static str>,
    frame: &'static str,
    evidence: Vec<&'static str>,
}

fn codes(set: CategorySet) -> Vec<&'static str> {
    set.iter().map(Category::code).collect()
}

pub fn write_jsonl<W: Write>(records: &[MessageRecord], mut out: W) -> Result<()> {
    for r in records {
        let row = JsonOut {
            id: &r.id,
            account_id: &r.account_id,
            followers: r.followers,
            likes: r.likes,
            comments: r.comments,
            shares: r.shares,
            source: codes(r.source),
            appeal: codes(r.appeal),
            frame: r.frame.code(),
            evidence: codes(r.evidence),
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv<W: Write>(records: &[MessageRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "id",
        "account_id",
        "followers",
        "likes",
        "comments",
        "shares",
        "source",
        "appeal",
        "frame",
        "evidence",
    ])?;
    for r in records {
        w.write_record([
            r.id.clone(),
            r.account_id.clone(),
            r.followers.to_string(),
            r.likes.to_string(),
            r.comments.to_string(),
            r.shares.to_string(),
            r.source.join_codes("|"),
            r.appeal.join_codes("|"),
            r.frame.code().to_owned(),
            r.evidence.join_codes("|"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! SAFE taxonomy, coded-record model, ingestion and feature encoding.

mod labels;
mod reader;
mod record;
mod taxonomy;

pub use labels::{parse_labels_str, LabelRow};
pub use reader::{
    parse_corpus_str, parse_csv_str, parse_jsonl_str, read_corpus, write_csv, write_jsonl, Corpus,
    CorpusFormat, ParseReport, ReadOptions, RowIssue,
};
pub use record::{
    check_dimension, decode_features, encode_features, log1p_count, log_engagement,
    EngagementTriple, FeatureVector, Indicator, LabelSets, MessageRecord, Violation,
};
pub use taxonomy::{parse_code_list, Category, CategorySet, Dimension, CATEGORY_COUNT};

#[cfg(test)]
pub(crate) use record::tests::{record as test_record, valid_set};

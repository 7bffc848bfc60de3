//! Configuration, staged orchestration and report bundles.

mod agreement;
mod config;
mod report;
mod run;

pub use agreement::{agreement_files, compare_labels, AgreementReport, DimensionAgreement};
pub use config::{InputConfig, ReportConfig, RunConfig, TierConfig};
pub use report::{
    cluster_summary, sha256_hex, write_assignments_csv, write_clusters_csv, write_similarity_csv,
    Bundle, ClusterSummary, WrittenFile,
};
pub use run::{
    cluster_stage, exit_code, ingest, patterns_stage, run_pipeline, synergy_stage, tiers_stage,
    with_workers, write_cluster_files, write_pattern_files, write_synergy_files, write_tier_files,
    ClusterOutputs, Ingested, InputInfo, Manifest, PatternOutputs, RunSummary, Stage, StageError,
    TierOutputs, MANIFEST_FORMAT,
};

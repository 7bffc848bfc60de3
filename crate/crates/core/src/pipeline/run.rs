use std::fmt;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::RunConfig;
use super::report::{
    cluster_summary, sha256_hex, write_assignments_csv, write_clusters_csv, write_similarity_csv,
    Bundle, WrittenFile,
};
use crate::cluster::{
    assign_records, fit, subsample_stability, ClusterAssignment, ClusterModel, ClusterParams,
    StabilityReport,
};
use crate::corpus::{
    parse_corpus_str, Corpus, CorpusFormat, FeatureVector, Indicator, MessageRecord, ReadOptions,
};
use crate::error::{Error, Result};
use crate::patterns::{
    assign_patterns, profile_clusters, similarity_report, ClusterProfile, PatternAssignment,
    PatternConfig, SimilarityReport,
};
use crate::stats::Adjustment;
use crate::synergy::{
    complexity_curve, extremes_table, sort_effects, sweep, write_effects_csv, write_extremes_csv,
    BaselinePredicate, CellStyle, CombinationEffect, SweepParams,
};
use crate::tiers::{
    account_followers, assign_tiers, complexity_comparison, tier_sweep, tier_table,
    write_tier_table_csv, MinNScaling, TierComplexityStats, TierEffects, TierPartition, TierSizes,
    COMPLEXITY_ORDER,
};

pub const MANIFEST_FORMAT: &str = "safecomb-run-manifest";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Ingest,
    Cluster,
    Patterns,
    Synergy,
    Tiers,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Cluster => "cluster",
            Stage::Patterns => "patterns",
            Stage::Synergy => "synergy",
            Stage::Tiers => "tiers",
            Stage::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Debug)]
pub struct StageError {
    pub stage: Stage,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.stage, self.error)
    }
}

impl std::error::Error for StageError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl StageError {
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.error)
    }
}

/// 1 usage/config, 2 data validation, 3 internal numeric.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Config(_) | Error::Budget { .. } | Error::Io { .. } => 1,
        Error::InvalidInput(_)
        | Error::Validation(_)
        | Error::EmptyGroup(_)
        | Error::Csv(_)
        | Error::Serde(_) => 2,
        Error::Numeric(_) | Error::Stream(_) => 3,
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> std::result::Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

pub struct Ingested {
    pub corpus: Corpus,
    pub sha256: String,
    pub format: CorpusFormat,
}

/// Read and validate the input corpus. Rejected rows are reported, not fatal;
/// a corpus with no accepted record is.
pub fn ingest(path: &Path, format: CorpusFormat, lenient: bool) -> Result<Ingested> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|e| Error::Validation(format!("{} is not UTF-8: {e}", path.display())))?;
    let corpus = parse_corpus_str(text, format, ReadOptions { lenient })?;
    if corpus.records.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no valid records ({} rejected)",
            path.display(),
            corpus.report.rejected
        )));
    }
    let mut seen = std::collections::HashSet::new();
    if let Some(dup) = corpus.records.iter().find(|r| !seen.insert(r.id.as_str())) {
        return Err(Error::Validation(format!(
            "duplicate record id {:?}",
            dup.id
        )));
    }
    if corpus.report.rejected > 0 {
        log::warn!(
            "{} rows rejected while reading {}",
            corpus.report.rejected,
            path.display()
        );
    }
    Ok(Ingested {
        corpus,
        sha256: sha256_hex(&bytes),
        format,
    })
}

pub struct ClusterOutputs {
    pub model: ClusterModel,
    pub assignment: ClusterAssignment,
    pub stability: Option<StabilityReport>,
}

pub fn cluster_stage(
    records: &[MessageRecord],
    params: &ClusterParams,
    repeats: usize,
) -> Result<ClusterOutputs> {
    let vectors: Vec<FeatureVector> = records.iter().map(MessageRecord::features).collect();
    let model = fit(&vectors, params)?;
    let assignment = assign_records(&model, records)?;
    let stability = if repeats >= 2 {
        Some(subsample_stability(&vectors, params, repeats)?)
    } else {
        None
    };
    log::info!(
        "{} clusters, {:.1}% noise",
        model.clusters.len(),
        100.0 * assignment.noise_count() as f64 / assignment.len().max(1) as f64
    );
    Ok(ClusterOutputs {
        model,
        assignment,
        stability,
    })
}

pub struct PatternOutputs {
    pub profiles: Vec<ClusterProfile>,
    pub assignments: Vec<PatternAssignment>,
    pub warnings: Vec<String>,
    pub similarity: SimilarityReport,
}

pub fn patterns_stage(
    records: &[MessageRecord],
    assignment: &ClusterAssignment,
    config: &PatternConfig,
) -> Result<PatternOutputs> {
    let profiles = profile_clusters(assignment, records, config.dominance_threshold)?;
    let (assignments, warnings) = assign_patterns(&profiles, config)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let order: Vec<String> = config.patterns.iter().map(|p| p.name.clone()).collect();
    let similarity = similarity_report(&profiles, &assignments, &order, config.report_threshold)?;
    Ok(PatternOutputs {
        profiles,
        assignments,
        warnings,
        similarity,
    })
}

/// Sweeps of every baseline over the whole corpus.
pub fn synergy_stage(
    records: &[MessageRecord],
    baselines: &[BaselinePredicate],
    indicators: &[Indicator],
    params: &SweepParams,
) -> Result<Vec<CombinationEffect>> {
    let mut effects = Vec::new();
    for b in baselines {
        effects.extend(sweep(records, b, indicators, params)?);
    }
    sort_effects(&mut effects);
    Ok(effects)
}

pub struct TierOutputs {
    pub partition: TierPartition,
    pub effects: TierEffects,
    pub complexity: TierComplexityStats,
}

pub fn tiers_stage(
    records: &[MessageRecord],
    baselines: &[BaselinePredicate],
    indicators: &[Indicator],
    params: &SweepParams,
    scaling: MinNScaling,
    adjustment: Adjustment,
) -> Result<TierOutputs> {
    let partition = assign_tiers(&account_followers(records))?;
    let effects = tier_sweep(records, &partition, baselines, indicators, params, scaling)?;
    let complexity = if effects.values().flatten().any(|e| e.significant) {
        complexity_comparison(&effects, adjustment)?
    } else {
        log::warn!("no significant combination in any tier; rank tests skipped");
        TierComplexityStats {
            tiers: COMPLEXITY_ORDER
                .iter()
                .map(|&t| TierSizes::new(t, Vec::new()))
                .collect(),
            tested: Vec::new(),
            kw: None,
            dunn: None,
        }
    };
    Ok(TierOutputs {
        partition,
        effects,
        complexity,
    })
}

pub fn write_cluster_files(bundle: &mut Bundle, out: &ClusterOutputs) -> Result<()> {
    bundle.write_bytes(
        "cluster_model.json",
        (out.model.to_json()? + "\n").as_bytes(),
    )?;
    bundle.write_with("assignments.csv", |b| {
        write_assignments_csv(&out.assignment, b)
    })?;
    bundle.write_json(
        "cluster_summary.json",
        &cluster_summary(&out.model, &out.assignment),
    )?;
    if let Some(s) = &out.stability {
        bundle.write_json("cluster_stability.json", s)?;
    }
    Ok(())
}

pub fn write_pattern_files(bundle: &mut Bundle, out: &PatternOutputs) -> Result<()> {
    bundle.write_with("clusters.csv", |b| {
        write_clusters_csv(&out.profiles, &out.assignments, b)
    })?;
    bundle.write_with("similarity.csv", |b| {
        write_similarity_csv(&out.similarity, b)
    })?;
    bundle.write_json(
        "similarity_summary.json",
        &serde_json::json!({
            "global_mean": out.similarity.global_mean,
            "global_sd": out.similarity.global_sd,
            "threshold": out.similarity.threshold,
            "patterns": out.similarity.patterns,
            "high_pairs": out.similarity.high_pairs,
            "assignments": out.assignments,
            "warnings": out.warnings,
        }),
    )?;
    Ok(())
}

pub fn write_synergy_files(
    bundle: &mut Bundle,
    effects: &[CombinationEffect],
    baselines: &[BaselinePredicate],
    indicators: &[Indicator],
    top: usize,
) -> Result<()> {
    bundle.write_with("effects.csv", |b| write_effects_csv(effects, b))?;
    let curve = complexity_curve(effects);
    bundle.write_with("complexity.csv", |b| curve.write_csv(b))?;
    let patterns: Vec<String> = baselines.iter().map(|b| b.name.clone()).collect();
    let rows = extremes_table(effects, &patterns, "", indicators, top, CellStyle::Compact);
    bundle.write_with("combinations.csv", |b| {
        write_extremes_csv(&rows, indicators, b)
    })?;
    Ok(())
}

pub fn write_tier_files(
    bundle: &mut Bundle,
    out: &TierOutputs,
    baselines: &[BaselinePredicate],
    indicators: &[Indicator],
    top: usize,
) -> Result<()> {
    bundle.write_json(
        "tier_summary.json",
        &serde_json::json!({
            "accounts": out.partition.assignments.len(),
            "tiers": out.partition.summaries,
            "anova": out.partition.anova,
            "anova_note": out.partition.anova_note,
        }),
    )?;
    let patterns: Vec<String> = baselines.iter().map(|b| b.name.clone()).collect();
    let rows = tier_table(&out.effects, &patterns, indicators, top);
    bundle.write_with("tier_effects.csv", |b| {
        write_tier_table_csv(&rows, indicators, b)
    })?;
    bundle.write_with("tier_complexity.csv", |b| out.complexity.write_csv(b))?;
    bundle.write_bytes(
        "tier_tests.json",
        (out.complexity.tests_json()? + "\n").as_bytes(),
    )?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct InputInfo {
    pub path: String,
    pub format: CorpusFormat,
    pub sha256: String,
    pub accepted: usize,
    pub rejected: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub format: String,
    pub tool: String,
    pub version: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; the only field that differs between reruns.
    pub created_unix: u64,
    pub input: InputInfo,
    pub config: String,
    pub stages: Vec<Stage>,
    pub files: Vec<WrittenFile>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub records: usize,
    pub clusters: usize,
    pub noise_fraction: f64,
    pub effects: usize,
    pub significant: usize,
    pub files: Vec<WrittenFile>,
}

/// Full run: ingest, cluster, patterns, synergy, tiers, reports. Each stage's
/// files are on disk before the next stage starts.
pub fn run_pipeline(config: &RunConfig) -> std::result::Result<RunSummary, StageError> {
    config.validate().at(Stage::Config)?;
    with_workers(config.workers, || run_stages(config)).at(Stage::Config)?
}

/// Run `f` on a pool of `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let n = workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(Error::Config("workers: must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("workers: {e}")))?;
    Ok(pool.install(f))
}

fn run_stages(config: &RunConfig) -> std::result::Result<RunSummary, StageError> {
    let cfg = config.seeded().at(Stage::Config)?;
    let seed = cfg.require_seed().at(Stage::Config)?;
    let out_dir = cfg.output.clone().expect("validated");
    let input = cfg.input.path.clone().expect("validated");
    let format = cfg.input.resolved_format().expect("path present");
    let mut bundle = Bundle::create(&out_dir).at(Stage::Report)?;
    let mut stages = Vec::new();

    let ingested = ingest(&input, format, cfg.input.lenient).at(Stage::Ingest)?;
    bundle
        .write_json("parse_report.json", &ingested.corpus.report)
        .at(Stage::Ingest)?;
    let records = &ingested.corpus.records;
    stages.push(Stage::Ingest);

    let clusters = cluster_stage(records, &cfg.cluster, cfg.cluster_repeats).at(Stage::Cluster)?;
    write_cluster_files(&mut bundle, &clusters).at(Stage::Cluster)?;
    stages.push(Stage::Cluster);

    let patterns =
        patterns_stage(records, &clusters.assignment, &cfg.patterns).at(Stage::Patterns)?;
    write_pattern_files(&mut bundle, &patterns).at(Stage::Patterns)?;
    stages.push(Stage::Patterns);

    let effects =
        synergy_stage(records, &cfg.baselines, &cfg.indicators, &cfg.sweep).at(Stage::Synergy)?;
    write_synergy_files(
        &mut bundle,
        &effects,
        &cfg.baselines,
        &cfg.indicators,
        cfg.report.top,
    )
    .at(Stage::Synergy)?;
    stages.push(Stage::Synergy);

    if cfg.tiers.enabled {
        let tiers = tiers_stage(
            records,
            &cfg.baselines,
            &cfg.indicators,
            &cfg.sweep,
            cfg.tiers.min_n_scaling,
            cfg.tiers.adjustment,
        )
        .at(Stage::Tiers)?;
        write_tier_files(
            &mut bundle,
            &tiers,
            &cfg.baselines,
            &cfg.indicators,
            cfg.report.top,
        )
        .at(Stage::Tiers)?;
        stages.push(Stage::Tiers);
    }

    let manifest = Manifest {
        format: MANIFEST_FORMAT.to_string(),
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        input: InputInfo {
            path: input.display().to_string(),
            format: ingested.format,
            sha256: ingested.sha256.clone(),
            accepted: ingested.corpus.report.accepted,
            rejected: ingested.corpus.report.rejected,
        },
        config: cfg.to_toml().at(Stage::Report)?,
        stages,
        files: bundle.files().to_vec(),
    };
    bundle
        .write_json("manifest.json", &manifest)
        .at(Stage::Report)?;

    Ok(RunSummary {
        records: records.len(),
        clusters: clusters.model.clusters.len(),
        noise_fraction: clusters.assignment.noise_count() as f64 / records.len() as f64,
        effects: effects.len(),
        significant: effects.iter().filter(|e| e.significant).count(),
        files: bundle.files().to_vec(),
    })
}

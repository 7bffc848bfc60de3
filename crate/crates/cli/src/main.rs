mod args;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use safecomb::cluster::{assign_records, ClusterModel};
use safecomb::corpus::{read_corpus, write_csv, write_jsonl, CorpusFormat, ReadOptions};
use safecomb::patterns::PatternConfig;
use safecomb::pipeline::{
    agreement_files, cluster_stage, exit_code, ingest, patterns_stage, run_pipeline, synergy_stage,
    tiers_stage, with_workers, write_cluster_files, write_pattern_files, write_synergy_files,
    write_tier_files, Bundle, ClusterOutputs, RunConfig,
};
use safecomb::synthgen::{generate, GeneratorSpec};
use safecomb::Error;

use args::{
    AgreementArgs, Cli, ClusterArgs, ClusterFlags, Command, InputArgs, PatternsArgs, RunArgs,
    SimulateArgs, SweepFlags, SynergyArgs, TierFlags, TiersArgs, ValidateArgs,
};

/// A message and the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e) as u8,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn base_config(input: &InputArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &input.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = &input.input {
        cfg.input.path = Some(p.clone());
    }
    if input.format.is_some() {
        cfg.input.format = input.format;
    }
    cfg.input.lenient |= input.lenient;
    if input.seed.is_some() {
        cfg.seed = input.seed;
    }
    if input.workers.is_some() {
        cfg.workers = input.workers;
    }
    Ok(cfg)
}

fn apply_cluster(cfg: &mut RunConfig, f: &ClusterFlags) {
    if let Some(v) = f.min_cluster_size {
        cfg.cluster.min_cluster_size = v;
    }
    if let Some(v) = f.min_samples {
        cfg.cluster.min_samples = v;
    }
    if let Some(v) = f.subsample {
        cfg.cluster.subsample_size = v;
    }
    if let Some(v) = f.repeats {
        cfg.cluster_repeats = v;
    }
}

fn apply_sweep(cfg: &mut RunConfig, f: &SweepFlags) -> CmdResult {
    if f.paper_defaults {
        cfg.apply_paper_defaults();
    }
    if let Some(v) = f.k_max {
        cfg.sweep.k_max = v;
    }
    if let Some(v) = f.min_n {
        cfg.sweep.min_n = v;
    }
    if let Some(v) = f.resamples {
        cfg.sweep.resamples = v;
    }
    if let Some(v) = f.level {
        cfg.sweep.level = v;
    }
    if let Some(v) = f.without {
        cfg.sweep.without = v;
    }
    if let Some(v) = f.budget {
        cfg.sweep.budget = v;
    }
    if let Some(v) = &f.indicators {
        cfg.indicators = v.clone();
    }
    if !f.baseline.eq_ignore_ascii_case("all") {
        let keep: Vec<_> = cfg
            .baselines
            .iter()
            .filter(|b| b.name.eq_ignore_ascii_case(&f.baseline))
            .cloned()
            .collect();
        if keep.is_empty() {
            let known: Vec<&str> = cfg.baselines.iter().map(|b| b.name.as_str()).collect();
            return Err(fail(
                1,
                format!(
                    "--baseline: unknown baseline {:?} (known: {}, all)",
                    f.baseline,
                    known.join(", ")
                ),
            ));
        }
        cfg.baselines = keep;
    }
    Ok(())
}

fn apply_tiers(cfg: &mut RunConfig, f: &TierFlags) {
    if let Some(v) = f.min_n_scaling {
        cfg.tiers.min_n_scaling = v;
    }
    if let Some(v) = f.adjustment {
        cfg.tiers.adjustment = v;
    }
}

/// Checks shared by the stage subcommands; returns the seeded config.
fn stage_config(cfg: &RunConfig) -> Result<RunConfig, Failure> {
    let path = cfg
        .input
        .path
        .as_ref()
        .ok_or_else(|| fail(1, "--input: no input corpus given"))?;
    if !path.is_file() {
        return Err(fail(
            1,
            format!(
                "--input: {} does not exist or is not a file",
                path.display()
            ),
        ));
    }
    if cfg.workers == Some(0) {
        return Err(fail(1, "--workers: must be at least 1"));
    }
    let seeded = cfg
        .seeded()
        .map_err(|_| fail(1, "--seed: a master seed is required"))?;
    seeded.cluster.validate()?;
    seeded.sweep.validate()?;
    seeded.patterns.validate()?;
    Ok(seeded)
}

fn out_dir(out: &Option<PathBuf>) -> PathBuf {
    out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn load_records(cfg: &RunConfig) -> Result<Vec<safecomb::corpus::MessageRecord>, Failure> {
    let path = cfg.input.path.as_ref().expect("checked");
    let format = cfg.input.resolved_format().expect("path present");
    Ok(ingest(path, format, cfg.input.lenient)?.corpus.records)
}

fn validate(a: ValidateArgs) -> CmdResult {
    let cfg = base_config(&a.input)?;
    let path = cfg
        .input
        .path
        .clone()
        .ok_or_else(|| fail(1, "--input: no input corpus given"))?;
    let format = cfg.input.resolved_format().expect("path present");
    let corpus = read_corpus(
        &path,
        format,
        ReadOptions {
            lenient: cfg.input.lenient,
        },
    )?;
    let report = serde_json::to_string_pretty(&corpus.report).map_err(Error::from)?;
    match &a.report {
        Some(p) => std::fs::write(p, report + "\n")
            .map_err(|e| fail(1, format!("{}: {e}", p.display())))?,
        None => eprintln!("{report}"),
    }
    println!(
        "{}: {} accepted, {} rejected, {} warnings",
        path.display(),
        corpus.report.accepted,
        corpus.report.rejected,
        corpus.report.warnings.len()
    );
    if corpus.report.rejected > 0 || corpus.records.is_empty() {
        return Err(fail(2, "validation failed"));
    }
    Ok(())
}

fn cluster(a: ClusterArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_cluster(&mut cfg, &a.cluster);
    let cfg = stage_config(&cfg)?;
    let records = load_records(&cfg)?;
    let out = with_workers(cfg.workers, || {
        cluster_stage(&records, &cfg.cluster, cfg.cluster_repeats)
    })??;
    let mut bundle = Bundle::create(&out_dir(&a.out))?;
    write_cluster_files(&mut bundle, &out)?;
    if let Some(p) = &a.model_out {
        out.model.save(p)?;
    }
    println!(
        "{} records, {} clusters, {} noise -> {}",
        records.len(),
        out.model.clusters.len(),
        out.assignment.noise_count(),
        bundle.dir().display()
    );
    Ok(())
}

fn patterns(a: PatternsArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_cluster(&mut cfg, &a.cluster);
    if let Some(p) = &a.patterns {
        cfg.patterns = PatternConfig::load(p)?;
    }
    let cfg = stage_config(&cfg)?;
    let records = load_records(&cfg)?;
    let mut bundle = Bundle::create(&out_dir(&a.out))?;
    let outputs = with_workers(cfg.workers, || -> Result<_, Error> {
        let clusters = match &a.model {
            Some(p) => {
                let model = ClusterModel::load(p)?;
                let assignment = assign_records(&model, &records)?;
                ClusterOutputs {
                    model,
                    assignment,
                    stability: None,
                }
            }
            None => cluster_stage(&records, &cfg.cluster, 0)?,
        };
        let patterns = patterns_stage(&records, &clusters.assignment, &cfg.patterns)?;
        Ok((clusters, patterns))
    })??;
    let (clusters, pats) = outputs;
    if a.model.is_none() {
        write_cluster_files(&mut bundle, &clusters)?;
    }
    write_pattern_files(&mut bundle, &pats)?;
    for p in &pats.similarity.patterns {
        let within = p
            .within_mean
            .map_or("n/a".to_string(), |m| format!("{m:.3}"));
        println!(
            "{}: clusters {:?}, within-pattern cosine {within}",
            p.pattern, p.clusters
        );
    }
    if let Some(g) = pats.similarity.global_mean {
        println!("global off-diagonal cosine {g:.3}");
    }
    Ok(())
}

fn synergy(a: SynergyArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_sweep(&mut cfg, &a.sweep)?;
    let cfg = stage_config(&cfg)?;
    let records = load_records(&cfg)?;
    let effects = with_workers(cfg.workers, || {
        synergy_stage(&records, &cfg.baselines, &cfg.indicators, &cfg.sweep)
    })??;
    let effects_path = a.out.clone().unwrap_or_else(|| {
        std::env::var_os(args::OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_default()
            .join("effects.csv")
    });
    let dir = effects_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut bundle = Bundle::create(dir)?;
    write_synergy_files(
        &mut bundle,
        &effects,
        &cfg.baselines,
        &cfg.indicators,
        cfg.report.top,
    )?;
    let default_name = bundle.path("effects.csv");
    if default_name != effects_path {
        std::fs::rename(&default_name, &effects_path)
            .map_err(|e| fail(1, format!("{}: {e}", effects_path.display())))?;
    }
    println!(
        "{} combinations evaluated, {} significant -> {}",
        effects.len(),
        effects.iter().filter(|e| e.significant).count(),
        effects_path.display()
    );
    Ok(())
}

fn tiers(a: TiersArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_sweep(&mut cfg, &a.sweep)?;
    apply_tiers(&mut cfg, &a.tiers);
    let cfg = stage_config(&cfg)?;
    let records = load_records(&cfg)?;
    let out = with_workers(cfg.workers, || {
        tiers_stage(
            &records,
            &cfg.baselines,
            &cfg.indicators,
            &cfg.sweep,
            cfg.tiers.min_n_scaling,
            cfg.tiers.adjustment,
        )
    })??;
    let mut bundle = Bundle::create(&out_dir(&a.out))?;
    write_tier_files(
        &mut bundle,
        &out,
        &cfg.baselines,
        &cfg.indicators,
        cfg.report.top,
    )?;
    let [top, middle, bottom] = out.partition.sizes();
    println!("accounts: top {top}, middle {middle}, bottom {bottom}");
    if let Some(kw) = &out.complexity.kw {
        println!(
            "Kruskal-Wallis H = {:.2}, p = {:.4}",
            kw.statistic, kw.p_value
        );
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let mut spec = match &a.spec {
        Some(p) => GeneratorSpec::load(p)?,
        None => GeneratorSpec::default(),
    };
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.workers == Some(0) {
        return Err(fail(1, "--workers: must be at least 1"));
    }
    let corpus = with_workers(a.workers, || generate(&spec))??;
    let file = File::create(&a.out).map_err(|e| fail(1, format!("{}: {e}", a.out.display())))?;
    let writer = BufWriter::new(file);
    match CorpusFormat::from_path(&a.out) {
        CorpusFormat::Csv => write_csv(&corpus.records, writer)?,
        CorpusFormat::Jsonl => write_jsonl(&corpus.records, writer)?,
    }
    if let Some(p) = &a.manifest {
        std::fs::write(p, corpus.truth.to_json()? + "\n")
            .map_err(|e| fail(1, format!("{}: {e}", p.display())))?;
    }
    println!("{} records -> {}", corpus.records.len(), a.out.display());
    Ok(())
}

fn agreement(a: AgreementArgs) -> CmdResult {
    let report = agreement_files(&a.labels_a, &a.labels_b)?;
    for d in &report.dimensions {
        println!(
            "{:<8} κ = {:.3}; accuracy = {:.1}%",
            d.dimension.name(),
            d.result.kappa,
            100.0 * d.result.accuracy
        );
    }
    println!("pooled   {}", report.headline());
    println!(
        "category κ = {:.3}; accuracy = {:.1}% over {} items",
        report.categories.kappa,
        100.0 * report.categories.accuracy,
        report.items
    );
    if let Some(p) = &a.out {
        let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        std::fs::write(p, text + "\n").map_err(|e| fail(1, format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn run(a: RunArgs) -> CmdResult {
    let mut cfg = base_config(&a.input)?;
    apply_cluster(&mut cfg, &a.cluster);
    apply_sweep(&mut cfg, &a.sweep)?;
    apply_tiers(&mut cfg, &a.tiers);
    if a.no_tiers {
        cfg.tiers.enabled = false;
    }
    if let Some(p) = &a.patterns {
        cfg.patterns = PatternConfig::load(p)?;
    }
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    let summary = run_pipeline(&cfg).map_err(|e| Failure {
        code: e.exit_code() as u8,
        message: e.to_string(),
    })?;
    println!(
        "{} records, {} clusters ({:.1}% noise), {} effects ({} significant), {} files in {}",
        summary.records,
        summary.clusters,
        100.0 * summary.noise_fraction,
        summary.effects,
        summary.significant,
        summary.files.len() + 1,
        cfg.output.as_deref().unwrap_or(Path::new(".")).display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Validate(a) => validate(a),
        Command::Cluster(a) => cluster(a),
        Command::Patterns(a) => patterns(a),
        Command::Synergy(a) => synergy(a),
        Command::Tiers(a) => tiers(a),
        Command::Simulate(a) => simulate(a),
        Command::Agreement(a) => agreement(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

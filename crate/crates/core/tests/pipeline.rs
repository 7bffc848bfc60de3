use std::path::Path;

use safecomb::cluster::ClusterParams;
use safecomb::corpus::write_jsonl;
use safecomb::patterns::PatternConfig;
use safecomb::pipeline::{
    cluster_stage, patterns_stage, run_pipeline, InputConfig, RunConfig, Stage,
};
use safecomb::synergy::SweepParams;
use safecomb::synthgen::{generate, GeneratorSpec, Population};

fn pop(name: &str, prototype: &str, size: usize) -> Population {
    Population {
        name: name.into(),
        prototype: prototype.into(),
        size,
    }
}

fn small_spec(seed: u64) -> GeneratorSpec {
    GeneratorSpec {
        seed,
        populations: GeneratorSpec::default()
            .populations
            .into_iter()
            .map(|p| Population { size: 500, ..p })
            .collect(),
        uniform_records: 200,
        accounts: 30,
        ..GeneratorSpec::default()
    }
}

fn write_corpus(spec: &GeneratorSpec, path: &Path) {
    let corpus = generate(spec).unwrap();
    let file = std::fs::File::create(path).unwrap();
    write_jsonl(&corpus.records, std::io::BufWriter::new(file)).unwrap();
}

fn small_config(input: &Path, out: &Path) -> RunConfig {
    RunConfig {
        seed: Some(1),
        input: InputConfig {
            path: Some(input.to_path_buf()),
            ..Default::default()
        },
        output: Some(out.to_path_buf()),
        cluster: ClusterParams {
            min_cluster_size: 50,
            min_samples: 10,
            ..ClusterParams::default()
        },
        sweep: SweepParams {
            k_max: 2,
            min_n: 100,
            resamples: 100,
            ..SweepParams::default()
        },
        ..RunConfig::default()
    }
}

#[test]
fn subtype_clusters_are_closer_within_their_pattern() {
    // Two representatives per pattern, so every pattern spans two clusters.
    let spec = GeneratorSpec {
        seed: 4,
        populations: vec![
            pop("IAP", "Exp+Valu+Gain+ExpEv", 2500),
            pop("IAP", "Exp+Util+Gain+ExpEv", 2500),
            pop("NP", "NoSrc+Valu+Gain+Narr", 2500),
            pop("NP", "NoSrc+Util+Gain+Narr", 2500),
            pop("AA", "NoSrc+Valu+Gain+NoEv", 2500),
            pop("AA", "NoSrc+Util+Gain+NoEv", 2500),
            pop("CE", "NoSrc+NoApp+NoFrm+NoEv", 2500),
            pop("CE", "NoSrc+NoApp+Gain+NoEv", 2500),
        ],
        uniform_records: 1000,
        ..GeneratorSpec::default()
    };
    let corpus = generate(&spec).unwrap();
    let clusters = cluster_stage(&corpus.records, &ClusterParams::default(), 0).unwrap();
    assert_eq!(clusters.model.clusters.len(), 8);
    let out = patterns_stage(
        &corpus.records,
        &clusters.assignment,
        &PatternConfig::default(),
    )
    .unwrap();
    let global = out.similarity.global_mean.unwrap();
    for p in &out.similarity.patterns {
        assert_eq!(p.clusters.len(), 2, "{}", p.pattern);
        let within = p.within_mean.unwrap();
        assert!(
            within - global >= 0.10,
            "{}: {within} vs {global}",
            p.pattern
        );
    }
}

#[test]
fn full_run_writes_a_complete_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&small_spec(2), &input);
    let out = dir.path().join("bundle");
    let summary = run_pipeline(&small_config(&input, &out)).unwrap();
    assert_eq!(summary.records, 2200);
    assert!(summary.clusters >= 4);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 1);
    let listed: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["name"].as_str().unwrap())
        .collect();
    for name in [
        "parse_report.json",
        "cluster_model.json",
        "assignments.csv",
        "clusters.csv",
        "similarity.csv",
        "effects.csv",
        "complexity.csv",
        "combinations.csv",
        "tier_summary.json",
        "tier_effects.csv",
        "tier_complexity.csv",
        "tier_tests.json",
    ] {
        assert!(listed.contains(&name), "{name} missing from manifest");
        assert!(out.join(name).is_file(), "{name} missing on disk");
    }
    // The recorded config reproduces the run.
    let config = RunConfig::from_toml(manifest["config"].as_str().unwrap()).unwrap();
    assert_eq!(config.seed, Some(1));
    assert_eq!(config.sweep.k_max, 2);
}

#[test]
fn disabled_tiers_write_no_tier_files() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&small_spec(3), &input);
    let out = dir.path().join("bundle");
    let mut config = small_config(&input, &out);
    config.tiers.enabled = false;
    run_pipeline(&config).unwrap();
    assert!(out.join("effects.csv").is_file());
    assert!(!out.join("tier_effects.csv").exists());
}

#[test]
fn failures_name_their_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bundle");

    let missing = small_config(&dir.path().join("absent.jsonl"), &out);
    let err = run_pipeline(&missing).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert!(err.to_string().contains("input"), "{err}");
    assert_eq!(err.exit_code(), 1);

    let input = dir.path().join("corpus.jsonl");
    write_corpus(&small_spec(5), &input);
    let mut unseeded = small_config(&input, &out);
    unseeded.seed = None;
    let err = run_pipeline(&unseeded).unwrap_err();
    assert_eq!(err.stage, Stage::Config);
    assert!(err.to_string().contains("seed"), "{err}");

    let mut budget = small_config(&input, &out);
    budget.sweep.k_max = 6;
    budget.sweep.budget = 100;
    let err = run_pipeline(&budget).unwrap_err();
    assert_eq!(err.stage, Stage::Synergy);
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus(&small_spec(6), &input);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_pipeline(&small_config(&input, &a)).unwrap();
    let mut second = small_config(&input, &b);
    second.workers = Some(3);
    run_pipeline(&second).unwrap();
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
            "{name:?}"
        );
    }
}

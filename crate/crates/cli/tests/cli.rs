use std::path::Path;
use std::process::{Command, Output};

fn safecomb(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safecomb"))
        .args(args)
        .current_dir(cwd)
        .env_remove("SAFECOMB_OUT")
        .env_remove("RUST_LOG")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn header(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

const SMALL_SPEC: &str = r#"{
  "seed": 3,
  "populations": [
    {"name": "IAP", "prototype": "Exp+Valu+Gain+ExpEv", "size": 400},
    {"name": "NP", "prototype": "NoSrc+Valu+Gain+Narr", "size": 400},
    {"name": "AA", "prototype": "NoSrc+Valu+Gain+NoEv", "size": 400},
    {"name": "CE", "prototype": "NoSrc+NoApp+NoFrm+NoEv", "size": 400}
  ],
  "flip_rate": 0.05,
  "uniform_records": 200,
  "accounts": 20
}"#;

fn simulate(dir: &Path) {
    std::fs::write(dir.join("spec.json"), SMALL_SPEC).unwrap();
    let o = safecomb(
        &[
            "simulate",
            "--spec",
            "spec.json",
            "--out",
            "corpus.jsonl",
            "--manifest",
            "truth.json",
        ],
        dir,
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn help_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = safecomb(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("simulate"));
    let o = safecomb(&["run", "--no-such-flag"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = safecomb(&["synergy", "--indicators", "views"], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_validate_and_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d);
    let truth: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("truth.json")).unwrap()).unwrap();
    assert_eq!(truth["records"].as_array().unwrap().len(), 1800);

    let o = safecomb(
        &[
            "validate",
            "--input",
            "corpus.jsonl",
            "--report",
            "parse.json",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("1800 accepted"));

    let o = safecomb(
        &[
            "run",
            "--input",
            "corpus.jsonl",
            "--seed",
            "9",
            "--min-cluster-size",
            "40",
            "--min-samples",
            "10",
            "--k-max",
            "2",
            "--min-n",
            "100",
            "--resamples",
            "100",
            "--out",
            "bundle",
        ],
        d,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let b = d.join("bundle");
    assert_eq!(
        header(&b.join("effects.csv")),
        "pattern,combination,indicator,k,n_with,n_without,delta_e,ci_lo,ci_hi,significant"
    );
    assert_eq!(
        header(&b.join("clusters.csv")),
        "id,size,pattern,dominant,centroid"
    );
    assert_eq!(
        header(&b.join("tier_complexity.csv")),
        "level,count,mean,sd,min,max,dunn_p"
    );
    assert!(b.join("manifest.json").is_file());
}

#[test]
fn stage_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    simulate(d);
    let common = ["--input", "corpus.jsonl", "--seed", "4"];
    let with = |extra: &[&str]| -> Vec<String> {
        common.iter().chain(extra).map(|s| s.to_string()).collect()
    };
    let run = |sub: &str, extra: &[&str]| {
        let mut args = vec![sub.to_string()];
        args.extend(with(extra));
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = safecomb(&refs, d);
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
        o
    };
    run(
        "cluster",
        &[
            "--min-cluster-size",
            "40",
            "--min-samples",
            "10",
            "--model-out",
            "model.json",
            "--out",
            "c",
        ],
    );
    assert!(d.join("c/assignments.csv").is_file());
    run("patterns", &["--model", "model.json", "--out", "p"]);
    assert!(d.join("p/similarity_summary.json").is_file());
    assert!(!d.join("p/assignments.csv").exists());
    run(
        "synergy",
        &[
            "--baseline",
            "AA",
            "--indicators",
            "likes,shares",
            "--k-max",
            "2",
            "--resamples",
            "50",
            "--out",
            "s/aa.csv",
        ],
    );
    let effects = std::fs::read_to_string(d.join("s/aa.csv")).unwrap();
    assert!(effects.lines().skip(1).all(|l| l.starts_with("AA,")));
    assert!(!effects.contains(",comments,"));
    run(
        "tiers",
        &[
            "--k-max",
            "1",
            "--resamples",
            "50",
            "--min-n",
            "20",
            "--out",
            "t",
        ],
    );
    assert!(d.join("t/tier_tests.json").is_file());
}

#[test]
fn configuration_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = safecomb(&["run", "--seed", "1", "--out", "x"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("input"), "{}", stderr(&o));

    simulate(d);
    let o = safecomb(&["run", "--input", "corpus.jsonl", "--out", "x"], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("seed"), "{}", stderr(&o));

    let o = safecomb(
        &[
            "synergy",
            "--input",
            "corpus.jsonl",
            "--seed",
            "1",
            "--baseline",
            "XYZ",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--baseline"), "{}", stderr(&o));

    let o = safecomb(
        &[
            "synergy",
            "--input",
            "corpus.jsonl",
            "--seed",
            "1",
            "--k-max",
            "7",
            "--budget",
            "10",
        ],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k_max"), "{}", stderr(&o));

    std::fs::write(d.join("bad.toml"), "seed = 1\nunknown_key = 3\n").unwrap();
    let o = safecomb(
        &["run", "--config", "bad.toml", "--input", "corpus.jsonl"],
        d,
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown_key"), "{}", stderr(&o));
}

#[test]
fn validate_rejects_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let good = r#"{"id":"a","account_id":"u","followers":10,"likes":1,"comments":0,"shares":0,"source":["Exp"],"appeal":["Valu"],"frame":"Gain","evidence":["ExpEv"]}"#;
    let bad = r#"{"id":"b","account_id":"u","followers":10,"likes":1,"comments":0,"shares":0,"source":["Exp","NoSrc"],"appeal":["Valu"],"frame":"Gain","evidence":["ExpEv"]}"#;
    std::fs::write(d.join("c.jsonl"), format!("{good}\n{bad}\n")).unwrap();
    let o = safecomb(&["validate", "--input", "c.jsonl"], d);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = safecomb(&["validate", "--input", "c.jsonl", "--lenient"], d);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(d.join("ok.jsonl"), format!("{good}\n")).unwrap();
    let o = safecomb(&["validate", "--input", "ok.jsonl"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn agreement_between_coders() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("a.csv"),
        "id,source,appeal,frame,evidence\n1,Exp,Valu,Gain,ExpEv\n2,NoSrc,Fear,Loss,NoEv\n",
    )
    .unwrap();
    std::fs::write(
        d.join("b.csv"),
        "id,source,appeal,frame,evidence\n1,Exp,Valu,Gain,ExpEv\n2,NoSrc,Fear,Gain,NoEv\n",
    )
    .unwrap();
    let o = safecomb(&["agreement", "a.csv", "b.csv", "--out", "k.json"], d);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("k.json")).unwrap()).unwrap();
    assert_eq!(report["items"], 2);

    std::fs::write(
        d.join("c.csv"),
        "id,source,appeal,frame,evidence\n1,Exp,Valu,Gain,ExpEv\n3,NoSrc,Fear,Gain,NoEv\n",
    )
    .unwrap();
    let o = safecomb(&["agreement", "a.csv", "c.csv"], d);
    assert_eq!(o.status.code(), Some(2));
}

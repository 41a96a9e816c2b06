use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn dqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dqlab")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(dqlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dqlab(&[]).status.code(), Some(1));
    // a subcommand that needs --manifest
    let data = fixture("mixed.csv");
    assert_eq!(dqlab(&["measure", path(&data)]).status.code(), Some(1));
}

#[test]
fn help_and_version_succeed() {
    let help = dqlab(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8(help.stdout).unwrap();
    for cmd in ["measure", "pollute", "split", "run", "report"] {
        assert!(text.contains(cmd), "{text}");
    }
    assert_eq!(dqlab(&["--version"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "colour,size,weight,height,kind\nred,s,heavy,150,k0\n").unwrap();
    let out = dqlab(&["--manifest", path(&fixture("mixed.toml")), "measure", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("weight"));
}

#[test]
fn measure_is_stable() {
    let (manifest, data) = (fixture("mixed.toml"), fixture("mixed.csv"));
    let args = ["--manifest", path(&manifest), "measure", path(&data)];
    let a = dqlab(&args);
    let b = dqlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["rows"], 1000);
    assert_eq!(report["completeness"], 1.0);
    assert!((report["uniqueness"].as_f64().unwrap() - 755.0 / 999.0).abs() < 1e-12);
}

#[test]
fn pollute_then_measure_against_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = fixture("mixed.toml");
    let out = dqlab(&[
        "--manifest",
        path(&manifest),
        "--seed",
        "3",
        "--out",
        path(dir.path()),
        "pollute",
        path(&fixture("mixed.csv")),
        "--dimension",
        "target_accuracy",
        "--level",
        "0.3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let log = std::fs::read_to_string(dir.path().join("pollution_log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 300);
    let measured = dqlab(&[
        "--manifest",
        path(&manifest),
        "measure",
        path(&dir.path().join("polluted.csv")),
        "--ground-truth",
        path(&fixture("mixed.csv")),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&measured.stdout).unwrap();
    assert!((report["target_accuracy"].as_f64().unwrap() - 0.7).abs() < 1e-12);

    let cons = tempfile::tempdir().unwrap();
    let out = dqlab(&[
        "--manifest",
        path(&manifest),
        "--out",
        path(cons.path()),
        "pollute",
        path(&fixture("mixed.csv")),
        "--dimension",
        "consistency_k3",
        "--level",
        "0.5",
    ]);
    assert!(out.status.success());
    assert!(cons.path().join("representations.json").exists());

    let dup = tempfile::tempdir().unwrap();
    let out = dqlab(&[
        "--manifest",
        path(&manifest),
        "--out",
        path(dup.path()),
        "pollute",
        path(&fixture("mixed.csv")),
        "--dimension",
        "uniqueness",
        "--level",
        "10/5",
    ]);
    assert!(out.status.success());
    let rows = std::fs::read_to_string(dup.path().join("polluted.csv"))
        .unwrap()
        .lines()
        .count()
        - 1;
    assert_eq!(rows, 756 * 2);
}

#[test]
fn split_writes_halves_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dqlab(&[
        "--manifest",
        path(&fixture("housing.toml")),
        "--out",
        path(dir.path()),
        "split",
        path(&fixture("housing.csv")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let train = std::fs::read_to_string(dir.path().join("train.csv")).unwrap();
    let test = std::fs::read_to_string(dir.path().join("test.csv")).unwrap();
    let (n_train, n_test) = (train.lines().count() - 1, test.lines().count() - 1);
    // rare price bins are dropped before splitting
    assert!(
        n_train + n_test > 1400 && n_train + n_test < 1500,
        "{n_train} + {n_test}"
    );
    assert!((n_train as f64 / (n_train + n_test) as f64 - 0.8).abs() < 0.01);
    // continuous prices come back after the stratified split
    assert!(train.lines().nth(1).unwrap().contains('.'));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("split.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);
}

#[test]
fn report_reemits_tables() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.csv");
    std::fs::write(
        &results,
        "dataset,dimension,scenario,algorithm,level,quality,metric,mean,std,n_runs\n\
         toy,completeness,1,knn,0,1,macro_f1,0.9,0,5\n\
         toy,completeness,1,knn,0.1,0.9,macro_f1,0.8,0.01,5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = dqlab(&["--out", path(&out_dir), "report", path(&results), "--format", "json"]);
    assert!(out.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("results.json")).unwrap()).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 2);
    assert_eq!(
        std::fs::read_to_string(out_dir.join("wide/completeness_s1.csv")).unwrap(),
        "level,0,0.1\nquality,1,0.9\nknn,0.9,0.8\n"
    );
}

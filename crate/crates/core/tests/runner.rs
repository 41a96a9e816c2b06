mod common;

use std::collections::BTreeMap;

use dqlab::models::{knn_classify, macro_f1};
use dqlab::runner::{mean_std, read_results_csv, run_on_dataset, write_outputs, ExperimentConfig, RunOptions};
use dqlab::scenario::{stratified_split, Dimension};
use dqlab::tabular::{derive_rng, OneHotEncoder};

fn config(extra: &str) -> ExperimentConfig {
    let text = format!(
        "dataset = \"separable\"\ndata = \"separable.csv\"\nmanifest = \"separable.toml\"\ntask = \"classification\"\n{extra}"
    );
    ExperimentConfig::from_toml_str(&text).unwrap()
}

#[test]
fn eleven_levels_times_five_seeds() {
    let (manifest, ds) = common::load_fixture("separable");
    let cfg = config("dimensions = [\"completeness\"]\nalgorithms = [\"majority\", \"class_ratio\"]");
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    for scenario in 1..=3u8 {
        for algorithm in ["majority", "class_ratio"] {
            let records: Vec<_> = out
                .records
                .iter()
                .filter(|r| r.scenario == scenario && r.algorithm == algorithm)
                .collect();
            assert_eq!(records.len(), 11);
            assert!(records.iter().all(|r| r.n_runs == 5));
            let runs = out
                .runs
                .iter()
                .filter(|r| r.scenario.id() == scenario && r.algorithm.name() == algorithm)
                .count();
            assert_eq!(runs, 55);
        }
    }
    assert_eq!(out.splits.len(), 5);
    assert_eq!(out.cells.len(), 3 * 11 * 5);
}

#[test]
fn aggregates_are_recomputable_from_the_run_log() {
    let (manifest, ds) = common::load_fixture("separable");
    let cfg = config("dimensions = [\"target_accuracy\"]\nscenarios = [1]\nalgorithms = [\"knn\"]\nseeds = [0, 1, 2]");
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &out.runs {
        groups.entry(r.level.to_string()).or_default().push(r.value);
    }
    for record in &out.records {
        let (mean, std) = mean_std(&groups[&record.level]);
        assert_eq!((record.mean, record.std), (mean, std));
        assert_eq!(record.n_runs, 3);
    }
}

#[test]
fn clean_level_equals_a_direct_baseline() {
    let (manifest, ds) = common::load_fixture("separable");
    let cfg = config(
        "dimensions = [\"completeness\", \"feature_accuracy\", \"uniqueness\"]\nalgorithms = [\"knn\"]\nseeds = [3]",
    );
    let out = run_on_dataset(&cfg, &manifest, ds.clone(), &RunOptions::default()).unwrap();

    let split = stratified_split(&ds, 0.8, &derive_rng(3, &["split"])).unwrap();
    let enc = OneHotEncoder::fit(&[&split.train, &split.test]).unwrap();
    let pred = knn_classify(
        &enc.transform(&split.train).unwrap(),
        split.train.class_labels().unwrap(),
        &enc.transform(&split.test).unwrap(),
        5,
    )
    .unwrap();
    let baseline = macro_f1(split.test.class_labels().unwrap(), &pred).unwrap();

    let clean: Vec<_> = out.runs.iter().filter(|r| r.level.is_clean()).collect();
    assert_eq!(clean.len(), 3 * 3);
    for r in clean {
        assert_eq!(r.value, baseline, "{} scenario {}", r.dimension, r.scenario);
        assert_eq!(r.quality, 1.0);
    }
}

#[test]
fn consistency_is_skipped_without_categorical_features() {
    let manifest = dqlab::tabular::DatasetManifest::from_toml_str(
        "target = \"t\"\n[[columns]]\nname = \"x\"\nkind = \"numerical\"\nplaceholder = -1\n[[columns]]\nname = \"t\"\nkind = \"categorical\"\n",
    )
    .unwrap();
    let mut csv = String::from("x,t\n");
    for i in 0..60 {
        csv += &format!("{},{}\n", i % 20, if i % 2 == 0 { "a" } else { "b" });
    }
    let ds = dqlab::tabular::read_csv(csv.as_bytes(), &manifest).unwrap();
    let cfg = config("dimensions = [\"consistency_k2\", \"completeness\"]\nscenarios = [3]\nalgorithms = [\"majority\"]\nseeds = [0]");
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    assert!(out.records.iter().all(|r| r.dimension == "completeness"));
    assert_eq!(out.records.len(), 11);
}

#[test]
fn regression_and_clustering_grids_run() {
    let (manifest, ds) = common::load_fixture("housing");
    let cfg = ExperimentConfig::from_toml_str(
        "dataset = \"housing\"\ndata = \"x\"\nmanifest = \"y\"\ntask = \"regression\"\nseeds = [0]\nscenarios = [1]\ndimensions = [\"class_balance\", \"target_accuracy\", \"uniqueness\"]",
    )
    .unwrap();
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    assert!(out.records.iter().all(|r| r.metric == "r2" && r.mean.is_finite()));
    let ridge_clean = out
        .records
        .iter()
        .find(|r| r.algorithm == "ridge" && r.dimension == "target_accuracy" && r.level == "0")
        .unwrap();
    assert!(ridge_clean.mean > 0.9, "{}", ridge_clean.mean);

    let (manifest, ds) = common::load_fixture("separable");
    let cfg = ExperimentConfig::from_toml_str(
        "dataset = \"separable\"\ndata = \"x\"\nmanifest = \"y\"\ntask = \"clustering\"\nseeds = [0]\ndimensions = [\"completeness\"]",
    )
    .unwrap();
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    assert_eq!(out.records.len(), 11);
    assert!(out
        .records
        .iter()
        .all(|r| r.scenario == 3 && r.algorithm == "kmeans" && r.metric == "ami"));
    assert!(out.splits.is_empty());
    assert!(out.records[0].mean > 0.9);
}

#[test]
fn outputs_round_trip_through_disk() {
    let (manifest, ds) = common::load_fixture("separable");
    let cfg = config("dimensions = [\"uniqueness\"]\nscenarios = [2]\nalgorithms = [\"cart\"]\nseeds = [5, 6]");
    let out = run_on_dataset(&cfg, &manifest, ds, &RunOptions::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_outputs(&cfg, &out, dir.path()).unwrap();
    assert_eq!(read_results_csv(dir.path().join("results.csv")).unwrap(), out.records);
    let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), out.runs.len() + 1);
    assert!(runs.starts_with("dataset,dimension,scenario,algorithm,level,seed,quality,metric,value\n"));
    assert!(dir.path().join("splits/seed-5.json").exists());
    assert!(dir.path().join("wide/uniqueness_s2.csv").exists());
    assert_eq!(
        out.records
            .iter()
            .filter(|r| r.dimension == Dimension::Uniqueness.to_string())
            .count(),
        9
    );
}

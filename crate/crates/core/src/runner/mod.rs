//! Grid execution: every (dimension, scenario, level, seed) cell is split,
//! polluted, measured and scored independently on a bounded worker pool,
//! then the results are merged in a fixed order.
//!
//! Randomness is keyed by seed and purpose only: the split draws from
//! `["split"]`, the pollution of a dimension from `["pollute", dimension]`
//! (with `"train"`/`"test"` children) and each learner from
//! `["model", algorithm]`. The level is deliberately not part of any path, so
//! pollution at a higher level extends the one at a lower level.

mod config;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use config::{Algorithm, ExperimentConfig, Hyperparameters, Task};
pub use report::{
    emit_report, mean_std, read_results_csv, read_results_json, write_results_csv, write_wide_table, ReportFormat,
    ResultRecord, RESULT_HEADER,
};

use crate::error::{Error, Result};
use crate::models::{
    adjusted_mutual_information, kmeans, knn_classify, macro_f1, r2, CartParams, ClassRatioClassifier, DecisionTree,
    KMeansParams, MajorityClassifier, MeanRegressor, Ridge,
};
use crate::scenario::{
    build_scenario, measure_dimension, pollute, quality_grid, stratified_split, Dimension, Level, PollutedHalf,
    PollutionOptions, Scenario, SplitManifest,
};
use crate::tabular::{
    derive_rng, discretize_target, drop_small_classes, load_csv, restore_numeric_target, save_csv, Dataset,
    DatasetManifest, OneHotEncoder,
};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    /// Where polluted CSVs and pollution logs go, when kept.
    pub intermediate_dir: Option<PathBuf>,
}

/// One learner scored on one cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub dimension: Dimension,
    pub scenario: Scenario,
    pub level: Level,
    #[serde(skip)]
    pub level_index: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub quality: f64,
    pub value: f64,
}

/// What pollution did to one cell, independent of the learners.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub dimension: Dimension,
    pub scenario: Scenario,
    pub level: Level,
    pub seed: u64,
    pub quality: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_changes: usize,
    pub test_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub dimension: Dimension,
    pub scenario: Scenario,
    pub level: Level,
    pub seed: u64,
    /// Empty when the whole cell failed before any learner ran.
    pub algorithm: Option<Algorithm>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<ResultRecord>,
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellSummary>,
    pub failures: Vec<Failure>,
    pub splits: Vec<SplitManifest>,
}

/// The dataset as the grid sees it, plus the per-seed splits.
struct Prepared {
    /// Classification and clustering: the loaded data. Regression: the
    /// target discretised and small classes discarded.
    data: Dataset,
    splits: BTreeMap<u64, (Dataset, Dataset)>,
    manifests: Vec<SplitManifest>,
}

struct Cell {
    dimension: Dimension,
    scenario: Scenario,
    level: Level,
    level_index: usize,
    seed: u64,
}

struct CellResult {
    summary: Option<CellSummary>,
    runs: Vec<RunRecord>,
    failures: Vec<Failure>,
}

fn prepare(cfg: &ExperimentConfig, manifest: &DatasetManifest, raw: Dataset) -> Result<Prepared> {
    let data = match cfg.task {
        Task::Regression => {
            let step = manifest
                .bin_step
                .ok_or_else(|| Error::Manifest("regression experiments need a bin_step in the manifest".into()))?;
            drop_small_classes(&discretize_target(&raw, step)?, cfg.min_class_size)?
        }
        Task::Classification | Task::Clustering => {
            raw.class_labels()?;
            raw
        }
    };
    let mut splits = BTreeMap::new();
    let mut manifests = Vec::new();
    if cfg.task != Task::Clustering {
        for &seed in &cfg.seeds {
            let split = stratified_split(&data, cfg.train_fraction, &derive_rng(seed, &["split"]))?;
            splits.insert(seed, (split.train, split.test));
            manifests.push(split.manifest);
        }
    }
    Ok(Prepared {
        data,
        splits,
        manifests,
    })
}

/// Regression keeps the discretised target only where the polluter needs
/// classes; every other polluter sees the continuous target.
fn needs_classes(dim: Dimension) -> bool {
    matches!(dim, Dimension::Uniqueness | Dimension::ClassBalance)
}

fn continuous(ds: &Dataset) -> Result<Dataset> {
    if ds.target_bins().is_some() {
        restore_numeric_target(ds)
    } else {
        Ok(ds.clone())
    }
}

fn evaluate(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    train: &Dataset,
    test: &Dataset,
    seed: u64,
    n_clusters: usize,
) -> Result<f64> {
    let encoder = OneHotEncoder::fit(&[train, test])?;
    let (xtr, xte) = (encoder.transform(train)?, encoder.transform(test)?);
    let h = &cfg.hyperparameters;
    let cart = CartParams {
        max_depth: h.cart_max_depth,
        min_leaf: h.cart_min_leaf,
    };
    let model_rng = derive_rng(seed, &["model", algorithm.name()]);
    match cfg.task {
        Task::Classification => {
            let (ytr, yte) = (train.class_labels()?, test.class_labels()?);
            let pred = match algorithm {
                Algorithm::Knn => knn_classify(&xtr, ytr, &xte, h.knn_k)?,
                Algorithm::Cart => DecisionTree::fit_classifier(&xtr, ytr, cart)?.predict_classes(&xte)?,
                Algorithm::Majority => MajorityClassifier::fit(ytr)?.predict(test.n_rows()),
                Algorithm::ClassRatio => ClassRatioClassifier::fit(ytr)?.predict(test.n_rows(), &mut model_rng.clone()),
                other => return Err(Error::InvalidParameter(format!("{other} is not a classifier"))),
            };
            macro_f1(yte, &pred)
        }
        Task::Regression => {
            let numeric = |ds: &Dataset| {
                ds.target_column()
                    .as_numerical()
                    .map(<[f64]>::to_vec)
                    .ok_or_else(|| Error::Internal("regression target is not numerical".into()))
            };
            let (ytr, yte) = (numeric(train)?, numeric(test)?);
            let pred = match algorithm {
                Algorithm::Ridge => Ridge::fit(&xtr, &ytr, h.ridge_alpha)?.predict(&xte)?,
                Algorithm::Cart => DecisionTree::fit_regressor(&xtr, &ytr, cart)?.predict_values(&xte)?,
                Algorithm::Mean => MeanRegressor::fit(&ytr)?.predict(test.n_rows()),
                other => return Err(Error::InvalidParameter(format!("{other} is not a regressor"))),
            };
            r2(&yte, &pred)
        }
        Task::Clustering => {
            let params = KMeansParams {
                k: n_clusters,
                max_iter: h.kmeans_max_iter,
                n_init: h.kmeans_n_init,
            };
            let clusters = kmeans(&xte, &params, &model_rng)?;
            adjusted_mutual_information(test.class_labels()?, &clusters.labels)
        }
    }
}

fn write_intermediate(dir: &Path, cell: &Cell, half: &str, outcome: &PollutedHalf) -> Result<()> {
    let dir = dir
        .join(cell.dimension.to_string())
        .join(format!("s{}", cell.scenario))
        .join(format!("level-{}", cell.level.to_string().replace('/', "_")));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let stem = format!("seed-{}-{half}", cell.seed);
    save_csv(&outcome.dataset, dir.join(format!("{stem}.csv")))?;
    outcome.log.save_jsonl(dir.join(format!("{stem}.log.jsonl")))?;
    if let Some(map) = &outcome.representations {
        map.save(dir.join(format!("{stem}.representations.json")))?;
    }
    Ok(())
}

fn run_cell(cfg: &ExperimentConfig, prep: &Prepared, cell: &Cell, opts: &RunOptions) -> CellResult {
    let failure = |algorithm: Option<Algorithm>, e: Error| Failure {
        dimension: cell.dimension,
        scenario: cell.scenario,
        level: cell.level,
        seed: cell.seed,
        algorithm,
        error: e.to_string(),
    };
    let pollution = PollutionOptions {
        dup_count: cfg.dup_count,
        sample_count: cfg.sample_count,
    };
    let rng = derive_rng(cell.seed, &["pollute", &cell.dimension.to_string()]);

    // (train, test, quality, train outcome, test outcome)
    let staged = (|| -> Result<(Dataset, Dataset, f64, PollutedHalf, PollutedHalf)> {
        match cfg.task {
            Task::Clustering => {
                // no split: the whole dataset is polluted once and clustered
                let half = pollute(&prep.data, cell.dimension, cell.level, &pollution, &rng.child("train"))?;
                let quality = measure_dimension(cell.dimension, &half, &prep.data)?;
                let ds = half.dataset.clone();
                Ok((ds.clone(), ds, quality, half.clone(), half))
            }
            Task::Classification | Task::Regression => {
                let (train, test) = &prep.splits[&cell.seed];
                let (train, test) = if needs_classes(cell.dimension) {
                    (train.clone(), test.clone())
                } else {
                    (continuous(train)?, continuous(test)?)
                };
                let run = build_scenario(
                    cell.scenario,
                    &train,
                    &test,
                    cell.dimension,
                    cell.level,
                    &pollution,
                    &rng,
                )?;
                let quality = run.quality()?;
                Ok((
                    continuous(&run.train.dataset)?,
                    continuous(&run.test.dataset)?,
                    quality,
                    run.train,
                    run.test,
                ))
            }
        }
    })();
    let (train, test, quality, train_out, test_out) = match staged {
        Ok(v) => v,
        Err(e) => {
            log::warn!(
                "{} scenario {} level {} seed {}: {e}",
                cell.dimension,
                cell.scenario,
                cell.level,
                cell.seed
            );
            return CellResult {
                summary: None,
                runs: Vec::new(),
                failures: vec![failure(None, e)],
            };
        }
    };
    let mut failures = Vec::new();
    if let Some(dir) = &opts.intermediate_dir {
        let halves: &[(&str, &PollutedHalf)] = match cfg.task {
            Task::Clustering => &[("data", &train_out)],
            _ => &[("train", &train_out), ("test", &test_out)],
        };
        for (name, outcome) in halves {
            if let Err(e) = write_intermediate(dir, cell, name, outcome) {
                failures.push(failure(None, e));
            }
        }
    }
    let n_clusters = prep.data.class_counts().map(|c| c.len()).unwrap_or(0);
    let mut runs = Vec::new();
    for algorithm in cfg.algorithms() {
        match evaluate(cfg, algorithm, &train, &test, cell.seed, n_clusters) {
            Ok(value) => runs.push(RunRecord {
                dimension: cell.dimension,
                scenario: cell.scenario,
                level: cell.level,
                level_index: cell.level_index,
                seed: cell.seed,
                algorithm,
                quality,
                value,
            }),
            Err(e) => {
                log::warn!(
                    "{algorithm} on {} scenario {} level {} seed {}: {e}",
                    cell.dimension,
                    cell.scenario,
                    cell.level,
                    cell.seed
                );
                failures.push(failure(Some(algorithm), e));
            }
        }
    }
    let clustering = cfg.task == Task::Clustering;
    CellResult {
        summary: Some(CellSummary {
            dimension: cell.dimension,
            scenario: cell.scenario,
            level: cell.level,
            seed: cell.seed,
            quality,
            train_rows: train.n_rows(),
            test_rows: if clustering { 0 } else { test.n_rows() },
            train_changes: train_out.log.len(),
            test_changes: if clustering { 0 } else { test_out.log.len() },
        }),
        runs,
        failures,
    }
}

fn aggregate(dataset: &str, metric: &str, runs: &[RunRecord]) -> Vec<ResultRecord> {
    let mut groups: BTreeMap<(Dimension, Scenario, Algorithm, usize), Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        groups
            .entry((r.dimension, r.scenario, r.algorithm, r.level_index))
            .or_default()
            .push(r);
    }
    groups
        .into_values()
        .map(|group| {
            let values: Vec<f64> = group.iter().map(|r| r.value).collect();
            let qualities: Vec<f64> = group.iter().map(|r| r.quality).collect();
            let (mean, std) = mean_std(&values);
            let first = group[0];
            ResultRecord {
                dataset: dataset.to_string(),
                dimension: first.dimension.to_string(),
                scenario: first.scenario.id(),
                algorithm: first.algorithm.to_string(),
                level: first.level.to_string(),
                quality: mean_std(&qualities).0,
                metric: metric.to_string(),
                mean,
                std,
                n_runs: group.len(),
            }
        })
        .collect()
}

/// Runs the whole grid of `cfg` on an already loaded dataset.
pub fn run_on_dataset(
    cfg: &ExperimentConfig,
    manifest: &DatasetManifest,
    raw: Dataset,
    opts: &RunOptions,
) -> Result<RunOutput> {
    cfg.validate()?;
    let prep = prepare(cfg, manifest, raw)?;
    let has_categorical = !prep.data.categorical_features().is_empty();
    let mut cells = Vec::new();
    for &dimension in &cfg.dimensions {
        if matches!(dimension, Dimension::Consistency { .. }) && !has_categorical {
            log::warn!("skipping {dimension}: the dataset has no categorical features");
            continue;
        }
        for scenario in cfg.scenarios() {
            for (level_index, level) in quality_grid(dimension).into_iter().enumerate() {
                for &seed in &cfg.seeds {
                    cells.push(Cell {
                        dimension,
                        scenario,
                        level,
                        level_index,
                        seed,
                    });
                }
            }
        }
    }
    log::info!("{}: {} cells on {} rows", cfg.dataset, cells.len(), prep.data.n_rows());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads)
        .build()
        .map_err(|e| Error::Internal(format!("cannot start worker pool: {e}")))?;
    let results: Vec<CellResult> = pool.install(|| cells.par_iter().map(|c| run_cell(cfg, &prep, c, opts)).collect());

    let mut out = RunOutput {
        records: Vec::new(),
        runs: Vec::new(),
        cells: Vec::new(),
        failures: Vec::new(),
        splits: prep.manifests,
    };
    for r in results {
        out.cells.extend(r.summary);
        out.runs.extend(r.runs);
        out.failures.extend(r.failures);
    }
    out.runs.sort_by(|a, b| {
        (a.dimension, a.scenario, a.algorithm, a.level_index, a.seed).cmp(&(
            b.dimension,
            b.scenario,
            b.algorithm,
            b.level_index,
            b.seed,
        ))
    });
    out.records = aggregate(&cfg.dataset, cfg.task.metric(), &out.runs);
    Ok(out)
}

/// Loads the configured dataset and runs the grid.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let manifest = DatasetManifest::load(&cfg.manifest)?;
    let raw = load_csv(&cfg.data, &manifest)?;
    run_on_dataset(cfg, &manifest, raw, opts)
}

fn write_csv_rows<S: Serialize>(path: &Path, rows: &[S], header: &[&str]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct RunRow<'a> {
    dataset: &'a str,
    dimension: String,
    scenario: u8,
    algorithm: &'static str,
    level: String,
    seed: u64,
    quality: f64,
    metric: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct FailureRow {
    dimension: String,
    scenario: u8,
    level: String,
    seed: u64,
    algorithm: &'static str,
    error: String,
}

/// Writes every output file of a run into `dir`.
pub fn write_outputs(cfg: &ExperimentConfig, out: &RunOutput, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    emit_report(&out.records, dir, &[ReportFormat::Csv, ReportFormat::Json])?;
    let metric = cfg.task.metric();
    let runs: Vec<RunRow> = out
        .runs
        .iter()
        .map(|r| RunRow {
            dataset: &cfg.dataset,
            dimension: r.dimension.to_string(),
            scenario: r.scenario.id(),
            algorithm: r.algorithm.name(),
            level: r.level.to_string(),
            seed: r.seed,
            quality: r.quality,
            metric,
            value: r.value,
        })
        .collect();
    write_csv_rows(
        &dir.join("runs.csv"),
        &runs,
        &[
            "dataset",
            "dimension",
            "scenario",
            "algorithm",
            "level",
            "seed",
            "quality",
            "metric",
            "value",
        ],
    )?;
    let cells: Vec<_> = out
        .cells
        .iter()
        .map(|c| {
            (
                c.dimension.to_string(),
                c.scenario.id(),
                c.level.to_string(),
                c.seed,
                c.quality,
                c.train_rows,
                c.test_rows,
                c.train_changes,
                c.test_changes,
            )
        })
        .collect();
    write_csv_rows(
        &dir.join("cells.csv"),
        &cells,
        &[
            "dimension",
            "scenario",
            "level",
            "seed",
            "quality",
            "train_rows",
            "test_rows",
            "train_changes",
            "test_changes",
        ],
    )?;
    let failures: Vec<FailureRow> = out
        .failures
        .iter()
        .map(|f| FailureRow {
            dimension: f.dimension.to_string(),
            scenario: f.scenario.id(),
            level: f.level.to_string(),
            seed: f.seed,
            algorithm: f.algorithm.map(|a| a.name()).unwrap_or(""),
            error: f.error.clone(),
        })
        .collect();
    write_csv_rows(
        &dir.join("failures.csv"),
        &failures,
        &["dimension", "scenario", "level", "seed", "algorithm", "error"],
    )?;
    let split_dir = dir.join("splits");
    fs::create_dir_all(&split_dir).map_err(|e| Error::io(&split_dir, e))?;
    for m in &out.splits {
        let path = split_dir.join(format!("seed-{}.json", m.seed));
        let text = serde_json::to_string_pretty(m)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pollute::DupCountDist;
use crate::scenario::{Dimension, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
    Clustering,
}

impl Task {
    pub fn metric(&self) -> &'static str {
        match self {
            Task::Classification => "macro_f1",
            Task::Regression => "r2",
            Task::Clustering => "ami",
        }
    }

    pub fn default_algorithms(&self) -> Vec<Algorithm> {
        match self {
            Task::Classification => vec![
                Algorithm::Knn,
                Algorithm::Cart,
                Algorithm::Majority,
                Algorithm::ClassRatio,
            ],
            Task::Regression => vec![Algorithm::Ridge, Algorithm::Cart, Algorithm::Mean],
            Task::Clustering => vec![Algorithm::KMeans],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Knn,
    Cart,
    Ridge,
    #[serde(rename = "kmeans")]
    KMeans,
    Majority,
    ClassRatio,
    Mean,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Knn => "knn",
            Algorithm::Cart => "cart",
            Algorithm::Ridge => "ridge",
            Algorithm::KMeans => "kmeans",
            Algorithm::Majority => "majority",
            Algorithm::ClassRatio => "class_ratio",
            Algorithm::Mean => "mean",
        }
    }

    fn supports(&self, task: Task) -> bool {
        matches!(
            (task, self),
            (
                Task::Classification,
                Algorithm::Knn | Algorithm::Cart | Algorithm::Majority | Algorithm::ClassRatio
            ) | (Task::Regression, Algorithm::Ridge | Algorithm::Cart | Algorithm::Mean)
                | (Task::Clustering, Algorithm::KMeans)
        )
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Algorithm::Knn,
            Algorithm::Cart,
            Algorithm::Ridge,
            Algorithm::KMeans,
            Algorithm::Majority,
            Algorithm::ClassRatio,
            Algorithm::Mean,
        ]
        .into_iter()
        .find(|a| a.name() == s)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

/// Fixed learner settings; no tuning is performed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparameters {
    pub knn_k: usize,
    pub cart_max_depth: usize,
    pub cart_min_leaf: usize,
    pub ridge_alpha: f64,
    pub kmeans_n_init: usize,
    pub kmeans_max_iter: usize,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            knn_k: 5,
            cart_max_depth: 8,
            cart_min_leaf: 5,
            ridge_alpha: 1.0,
            kmeans_n_init: 5,
            kmeans_max_iter: 100,
        }
    }
}

fn default_seeds() -> Vec<u64> {
    (0..5).collect()
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_min_class_size() -> usize {
    10
}

/// One experiment: a dataset, a task and the grid to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Name written into every result row.
    pub dataset: String,
    /// CSV file; relative paths resolve against the config file.
    pub data: PathBuf,
    pub manifest: PathBuf,
    pub task: Task,
    #[serde(default = "Dimension::all")]
    pub dimensions: Vec<Dimension>,
    /// Defaults to all three for supervised tasks and scenario 3 for clustering.
    #[serde(default)]
    pub scenarios: Option<Vec<Scenario>>,
    #[serde(default)]
    pub algorithms: Option<Vec<Algorithm>>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub hyperparameters: Hyperparameters,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    /// Discretised regression classes smaller than this are discarded.
    #[serde(default = "default_min_class_size")]
    pub min_class_size: usize,
    #[serde(default = "default_dup_count")]
    pub dup_count: DupCountDist,
    /// Rows per class-balance polluted version; derived from the data when absent.
    #[serde(default)]
    pub sample_count: Option<usize>,
}

fn default_dup_count() -> DupCountDist {
    DupCountDist::Always1
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a config file and resolves its data paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.data = base.join(&cfg.data);
        cfg.manifest = base.join(&cfg.manifest);
        Ok(cfg)
    }

    pub fn scenarios(&self) -> Vec<Scenario> {
        match (&self.scenarios, self.task) {
            (Some(s), _) => s.clone(),
            (None, Task::Clustering) => vec![Scenario::PollutedBoth],
            (None, _) => Scenario::all().to_vec(),
        }
    }

    pub fn algorithms(&self) -> Vec<Algorithm> {
        self.algorithms
            .clone()
            .unwrap_or_else(|| self.task.default_algorithms())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        if self.dimensions.is_empty() {
            return bad("at least one dimension is required".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        for a in self.algorithms() {
            if !a.supports(self.task) {
                return bad(format!("algorithm {a} does not apply to {:?} tasks", self.task));
            }
        }
        if self.task == Task::Clustering && self.scenarios().iter().any(|s| *s != Scenario::PollutedBoth) {
            return bad("clustering has no train/test split; only scenario 3 applies".into());
        }
        let h = &self.hyperparameters;
        if h.knn_k == 0 || h.cart_min_leaf == 0 || h.kmeans_n_init == 0 || h.kmeans_max_iter == 0 {
            return bad(
                "hyperparameters knn_k, cart_min_leaf, kmeans_n_init and kmeans_max_iter must be positive".into(),
            );
        }
        if h.ridge_alpha.is_nan() || h.ridge_alpha < 0.0 {
            return bad(format!("ridge_alpha must be non-negative, got {}", h.ridge_alpha));
        }
        Ok(())
    }
}

//! Seeded polluters, one per quality dimension.
//!
//! Every polluter is a pure function of its input dataset, its spec and the
//! [`RngStream`] it is handed, and returns a new dataset plus a
//! [`PollutionLog`] describing each change. Fraction-based polluters draw one
//! random permutation per feature and pollute a prefix of it, so the cells
//! touched at a lower level are always a subset of those touched at a higher
//! one.

mod balance;
mod consistency;
mod missing;
mod noise;
mod uniqueness;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Dataset, Value};

pub use balance::{default_sample_count, plan_class_balance, pollute_class_balance, BalancePlan};
pub use consistency::{pollute_consistent_representation, ConsistencySpec};
pub use missing::{pollute_completeness, CompletenessSpec};
pub use noise::{pollute_feature_accuracy, pollute_target_accuracy, FeatureAccuracySpec, TargetAccuracySpec};
pub use uniqueness::{deduplicate, pollute_uniqueness, DupCountDist, DuplicationFactor, UniquenessSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum LogEntry {
    Cell {
        row: usize,
        column: String,
        old: Value,
        new: Value,
    },
    /// Exact duplicate removed before duplication; `row` indexes the input.
    RowDropped { row: usize },
    /// `row` of the output is a copy of output row `source`.
    RowDuplicated { source: usize, row: usize },
    /// `row` of the output was drawn from input row `source`.
    RowSelected { source: usize, row: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PollutionLog {
    pub entries: Vec<LogEntry>,
}

impl PollutionLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Coordinates of every rewritten cell, as `(row, column)`.
    pub fn cells(&self) -> impl Iterator<Item = (usize, &str)> {
        self.entries.iter().filter_map(|e| match e {
            LogEntry::Cell { row, column, .. } => Some((*row, column.as_str())),
            _ => None,
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n").map_err(|e| Error::io("<pollution log>", e))?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pollution {
    pub dataset: Dataset,
    pub log: PollutionLog,
}

/// A pollution level given once for all features or per feature name.
/// Features missing from a per-feature map are left clean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FeatureLevels {
    All(f64),
    PerFeature(BTreeMap<String, f64>),
}

impl FeatureLevels {
    pub fn level(&self, feature: &str) -> f64 {
        match self {
            FeatureLevels::All(v) => *v,
            FeatureLevels::PerFeature(m) => m.get(feature).copied().unwrap_or(0.0),
        }
    }

    fn validate_fractions(&self) -> Result<()> {
        let check = |v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "pollution fraction {v} outside [0, 1]"
                )))
            }
        };
        match self {
            FeatureLevels::All(v) => check(*v),
            FeatureLevels::PerFeature(m) => m.values().try_for_each(|v| check(*v)),
        }
    }
}

/// `round(fraction * n)`, halves rounded up.
pub fn fraction_to_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    // absorb representation error such as 0.35 * 10 = 3.4999999999999996
    ((x + 0.5) * (1.0 + 1e-12)).floor().min(n as f64).max(0.0) as usize
}

pub(crate) fn check_fraction(v: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must lie in [0, 1], got {v}")))
    }
}

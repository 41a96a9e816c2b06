use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{fraction_to_count, FeatureLevels, LogEntry, Pollution, PollutionLog};
use crate::error::{Error, Result};
use crate::tabular::{Category, Column, Dataset, RngStream, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureAccuracySpec {
    /// Share of rows for categorical features; noise variance for numerical ones.
    pub levels: FeatureLevels,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetAccuracySpec {
    /// Share of flipped labels, or noise variance for a numerical target.
    pub level: f64,
}

/// Replaces `round(level * n)` cells, chosen as a prefix of a random
/// permutation, by a different value from the column's domain.
fn swap_categories(
    ds: &Dataset,
    out: &mut Dataset,
    col: usize,
    level: f64,
    rng: &RngStream,
    log: &mut PollutionLog,
) -> Result<()> {
    if !(0.0..=1.0).contains(&level) {
        return Err(Error::InvalidParameter(format!(
            "categorical pollution level {level} outside [0, 1]"
        )));
    }
    let n = ds.n_rows();
    let count = fraction_to_count(level, n);
    if count == 0 {
        return Ok(());
    }
    let meta = ds.meta(col);
    let domain = ds.observed_domain(col);
    if domain.len() < 2 {
        return Err(Error::column(
            &meta.name,
            "needs at least two distinct values to swap categories",
        ));
    }
    let original = ds.column(col).as_categorical().unwrap();
    let mut stream = rng.child(format!("feature:{}", meta.name));
    let order = stream.permutation(n);
    let Column::Categorical(values) = out.column_mut(col) else {
        unreachable!()
    };
    let mut changes: Vec<(usize, Category)> = Vec::with_capacity(count);
    for &row in &order[..count] {
        let current = &original[row];
        let new = match domain.binary_search(current) {
            Ok(pos) => {
                let mut j = stream.random_range(0..domain.len() - 1);
                if j >= pos {
                    j += 1;
                }
                domain[j].clone()
            }
            // a placeholder cell: any domain value differs from it
            Err(_) => domain[stream.random_range(0..domain.len())].clone(),
        };
        values[row] = new.clone();
        changes.push((row, new));
    }
    changes.sort_by_key(|(r, _)| *r);
    for (row, new) in changes {
        log.entries.push(LogEntry::Cell {
            row,
            column: meta.name.clone(),
            old: Value::Cat(original[row].clone()),
            new: Value::Cat(new),
        });
    }
    Ok(())
}

/// Adds `X * mean` to every non-missing cell with `X ~ N(0, variance)`.
/// The standard-normal draws depend only on the stream, so higher variances
/// scale the same noise pattern.
fn add_noise(
    ds: &Dataset,
    out: &mut Dataset,
    col: usize,
    variance: f64,
    rng: &RngStream,
    log: &mut PollutionLog,
) -> Result<()> {
    if !(variance >= 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise variance must be non-negative, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(());
    }
    let meta = ds.meta(col);
    let placeholder = meta.numerical_placeholder();
    let original = ds.column(col).as_numerical().unwrap();
    let present: Vec<f64> = original.iter().copied().filter(|v| Some(*v) != placeholder).collect();
    if present.is_empty() {
        return Ok(());
    }
    let mean = present.iter().sum::<f64>() / present.len() as f64;
    let sd = variance.sqrt();
    let mut stream = rng.child(format!("feature:{}", meta.name));
    let Column::Numerical(values) = out.column_mut(col) else {
        unreachable!()
    };
    for (row, v) in original.iter().enumerate() {
        let z: f64 = stream.sample(StandardNormal);
        if Some(*v) == placeholder {
            continue;
        }
        let new = v + z * sd * mean;
        values[row] = new;
        log.entries.push(LogEntry::Cell {
            row,
            column: meta.name.clone(),
            old: Value::Num(*v),
            new: Value::Num(new),
        });
    }
    Ok(())
}

pub fn pollute_feature_accuracy(ds: &Dataset, spec: &FeatureAccuracySpec, rng: &RngStream) -> Result<Pollution> {
    let mut out = ds.clone();
    let mut log = PollutionLog::default();
    for col in ds.feature_indices() {
        let level = spec.levels.level(&ds.meta(col).name);
        match ds.column(col) {
            Column::Categorical(_) => swap_categories(ds, &mut out, col, level, rng, &mut log)?,
            Column::Numerical(_) => add_noise(ds, &mut out, col, level, rng, &mut log)?,
            Column::Date(_) => {}
        }
    }
    Ok(Pollution { dataset: out, log })
}

pub fn pollute_target_accuracy(ds: &Dataset, spec: &TargetAccuracySpec, rng: &RngStream) -> Result<Pollution> {
    let mut out = ds.clone();
    let mut log = PollutionLog::default();
    let t = ds.target_index();
    match ds.column(t) {
        Column::Categorical(_) => swap_categories(ds, &mut out, t, spec.level, rng, &mut log)?,
        Column::Numerical(_) => add_noise(ds, &mut out, t, spec.level, rng, &mut log)?,
        Column::Date(_) => {
            return Err(Error::column(
                &ds.target_meta().name,
                "a date target cannot be polluted",
            ))
        }
    }
    Ok(Pollution { dataset: out, log })
}

//! Target class balance polluter.
//!
//! Classes are ordered by size (descending, ties by class value) and given
//! counts that form an arithmetic progression around `n_tilde / m`. With
//! common difference `delta` the pairwise imbalance of the progression is
//! `delta * m * (m^2 - 1) / 6`; equating it with
//! `lambda * (m + 1) / 3 * n_tilde` gives `delta = 2 * lambda * n_tilde / (m * (m - 1))`.

use serde::Serialize;

use super::{LogEntry, Pollution, PollutionLog};
use crate::error::{Error, Result};
use crate::quality::imbalance_of_counts;
use crate::tabular::{Category, Dataset, RngStream};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancePlan {
    pub requested_lambda: f64,
    /// Degree of imbalance actually applied (`requested_lambda` capped).
    pub lambda: f64,
    /// Largest degree at which the smallest class still holds `s_min` rows.
    pub lambda_cap: f64,
    /// Total rows of the polluted dataset.
    pub sample_count: usize,
    /// Classes in polluter order; counts are non-decreasing along it.
    pub classes: Vec<Category>,
    pub counts: Vec<usize>,
    pub delta: f64,
    pub s_max: usize,
    pub s_min: usize,
}

impl BalancePlan {
    pub fn imbalance(&self) -> u64 {
        imbalance_of_counts(&self.counts)
    }

    /// Degree of imbalance recovered from the integer counts.
    pub fn realized_lambda(&self) -> f64 {
        let m = self.counts.len() as f64;
        self.imbalance() as f64 / ((m + 1.0) / 3.0 * self.sample_count as f64)
    }
}

fn common_difference(lambda: f64, n_tilde: usize, m: usize) -> f64 {
    2.0 * lambda * n_tilde as f64 / (m as f64 * (m as f64 - 1.0))
}

/// Integer per-class counts for `lambda`, non-decreasing and summing to
/// `n_tilde`. Each count is the floor or ceiling of its exact progression
/// value; the ceilings go to the classes that bring the pairwise imbalance
/// closest to its exact target, preferring the largest classes.
fn progression_counts(lambda: f64, n_tilde: usize, m: usize) -> Vec<usize> {
    let delta = common_difference(lambda, n_tilde, m);
    let centre = n_tilde as f64 / m as f64;
    let exact: Vec<f64> = (0..m)
        .map(|i| centre + (i as f64 - (m as f64 - 1.0) / 2.0) * delta)
        .collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| (e + 1e-9).floor().max(0.0) as usize).collect();
    let remainder = n_tilde.saturating_sub(counts.iter().sum());
    if remainder == 0 {
        return counts;
    }
    // pairwise imbalance of sorted counts is sum (2i - m + 1) * c_i
    let weight = |i: usize| 2 * i as i64 - m as i64 + 1;
    let base: i64 = counts.iter().enumerate().map(|(i, &c)| weight(i) * c as i64).sum();
    let target = lambda * (m as f64 + 1.0) / 3.0 * n_tilde as f64;
    let need = target - base as f64;

    let mut chosen: Vec<usize> = (m - remainder..m).collect();
    let mut sum: i64 = chosen.iter().map(|&i| weight(i)).sum();
    // each step moves one chosen index down by one, lowering the sum by 2
    'lower: while ((sum - 2) as f64 - need).abs() < (sum as f64 - need).abs() {
        for k in 0..chosen.len() {
            let i = chosen[k];
            if i > 0 && (k == 0 || chosen[k - 1] != i - 1) {
                chosen[k] = i - 1;
                sum -= 2;
                continue 'lower;
            }
        }
        break;
    }
    for i in chosen {
        counts[i] += 1;
    }
    counts.sort_unstable();
    counts
}

fn smallest_allowed(counts: &[usize]) -> usize {
    let s_max = counts.iter().copied().max().unwrap_or(0);
    (s_max as f64 * 0.01).ceil() as usize
}

fn within_cap(counts: &[usize]) -> bool {
    counts.iter().copied().min().unwrap_or(0) >= smallest_allowed(counts)
}

/// Classes ordered by size descending, ties by class value ascending.
fn polluter_order(ds: &Dataset) -> Result<Vec<(Category, usize)>> {
    let mut classes: Vec<(Category, usize)> = ds.class_counts()?.into_iter().collect();
    classes.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(classes)
}

pub fn plan_class_balance(ds: &Dataset, lambda: f64, n_tilde: usize) -> Result<BalancePlan> {
    super::check_fraction(lambda, "degree of imbalance")?;
    let classes = polluter_order(ds)?;
    let m = classes.len();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "class balance needs at least 2 classes, got {m}"
        )));
    }
    let sample_count = n_tilde - n_tilde % m;
    if sample_count != n_tilde {
        log::warn!("sample count {n_tilde} is not a multiple of {m} classes; using {sample_count}");
    }
    if sample_count == 0 {
        return Err(Error::InvalidParameter(format!(
            "sample count {n_tilde} is smaller than the class count {m}"
        )));
    }

    // counts at the cap are monotone in lambda, so bisect for the largest valid degree
    let lambda_cap = if within_cap(&progression_counts(1.0, sample_count, m)) {
        1.0
    } else {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if within_cap(&progression_counts(mid, sample_count, m)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let applied = lambda.min(lambda_cap);
    let counts = progression_counts(applied, sample_count, m);

    for ((class, available), &wanted) in classes.iter().zip(&counts) {
        if wanted > *available {
            return Err(Error::Infeasible(format!(
                "class {class} needs {wanted} rows but only {available} are available"
            )));
        }
    }
    let s_max = counts.iter().copied().max().unwrap_or(0);
    Ok(BalancePlan {
        requested_lambda: lambda,
        lambda: applied,
        lambda_cap,
        sample_count,
        classes: classes.into_iter().map(|(c, _)| c).collect(),
        s_min: smallest_allowed(&counts),
        s_max,
        delta: common_difference(applied, sample_count, m),
        counts,
    })
}

/// Largest multiple of the class count for which both the balanced and the
/// most imbalanced plan can be drawn from `ds`.
pub fn default_sample_count(ds: &Dataset) -> Result<usize> {
    let classes = polluter_order(ds)?;
    let m = classes.len();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "class balance needs at least 2 classes, got {m}"
        )));
    }
    let min_class = classes.iter().map(|(_, c)| *c).min().unwrap_or(0);
    let mut n_tilde = (min_class * m).min(ds.n_rows());
    n_tilde -= n_tilde % m;
    while n_tilde >= m {
        if plan_class_balance(ds, 1.0, n_tilde).is_ok() {
            return Ok(n_tilde);
        }
        n_tilde -= m;
    }
    Err(Error::Infeasible(
        "no sample count supports the maximal imbalance".into(),
    ))
}

/// Draws the planned number of rows per class without replacement and
/// shuffles the result.
pub fn pollute_class_balance(ds: &Dataset, plan: &BalancePlan, rng: &RngStream) -> Result<Pollution> {
    let rows_by_class = ds.class_rows()?;
    if rows_by_class.len() != plan.classes.len() {
        return Err(Error::Infeasible(format!(
            "plan covers {} classes, dataset has {}",
            plan.classes.len(),
            rows_by_class.len()
        )));
    }
    let mut selected = Vec::with_capacity(plan.sample_count);
    for (class, &wanted) in plan.classes.iter().zip(&plan.counts) {
        let members = rows_by_class
            .get(class)
            .ok_or_else(|| Error::Infeasible(format!("class {class} is not present in the dataset")))?;
        if wanted > members.len() {
            return Err(Error::Infeasible(format!(
                "class {class} needs {wanted} rows but only {} are available",
                members.len()
            )));
        }
        let order = rng.child(format!("class:{class}")).permutation(members.len());
        let mut picked: Vec<usize> = order[..wanted].iter().map(|&i| members[i]).collect();
        picked.sort_unstable();
        selected.extend(picked);
    }
    let shuffle = rng.child("shuffle").permutation(selected.len());
    let rows: Vec<usize> = shuffle.iter().map(|&i| selected[i]).collect();
    let log = PollutionLog {
        entries: rows
            .iter()
            .enumerate()
            .map(|(row, &source)| LogEntry::RowSelected { source, row })
            .collect(),
    };
    Ok(Pollution {
        dataset: ds.select_rows(&rows)?,
        log,
    })
}

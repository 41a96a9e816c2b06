//! The six data-quality scores: consistency, completeness, feature accuracy,
//! target accuracy, uniqueness and target class balance.
//!
//! All functions are pure and deterministic. Scores that compare against a
//! clean version take a [`PairedDataset`].

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{Category, Column, Dataset, PairedDataset};

/// Semantic-equivalence groups per categorical column: every group is one
/// real-world value and lists all of its representations.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RepresentationMap {
    pub groups: BTreeMap<String, Vec<Vec<Category>>>,
}

impl RepresentationMap {
    pub fn get(&self, column: &str) -> Option<&[Vec<Category>]> {
        self.groups.get(column).map(Vec::as_slice)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Minimum replacements to make a column consistent, over the row count.
///
/// Each group is fixed by rewriting every cell to the group's most frequent
/// representation, which is the cheapest choice.
pub fn inconsistency(values: &[Category], known: &[Category], groups: &[Vec<Category>]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let known: BTreeSet<&Category> = known.iter().collect();
    let mut counts: BTreeMap<&Category, usize> = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0) += 1;
    }
    let mut claimed = BTreeSet::new();
    let mut replacements = 0usize;
    for group in groups {
        let mut total = 0;
        let mut best = 0;
        for rep in group {
            if !known.contains(rep) && !counts.contains_key(rep) {
                return Err(Error::InvalidParameter(format!(
                    "representation group references unknown value {rep}"
                )));
            }
            if !claimed.insert(rep) {
                return Err(Error::InvalidParameter(format!(
                    "value {rep} appears in more than one group"
                )));
            }
            let c = counts.get(rep).copied().unwrap_or(0);
            total += c;
            best = best.max(c);
        }
        replacements += total - best;
    }
    Ok(replacements as f64 / values.len() as f64)
}

fn column_inconsistency(ds: &Dataset, col: usize, map: &RepresentationMap) -> Result<f64> {
    let meta = ds.meta(col);
    match (ds.column(col), map.get(&meta.name)) {
        (Column::Categorical(values), Some(groups)) => inconsistency(values, meta.domain().unwrap_or(&[]), groups),
        _ => Ok(0.0),
    }
}

/// `1 - mean InCons` over the non-target features. Columns absent from the
/// map, numerical columns and dates count as consistent.
pub fn consistency(ds: &Dataset, map: &RepresentationMap) -> Result<f64> {
    let f = ds.n_features();
    if f == 0 {
        return Ok(1.0);
    }
    let mut sum = 0.0;
    for col in ds.feature_indices() {
        sum += column_inconsistency(ds, col, map)?;
    }
    Ok(1.0 - sum / f as f64)
}

/// Share of non-missing cells among the non-target features.
pub fn completeness(ds: &Dataset) -> f64 {
    let f = ds.n_features();
    if f == 0 {
        return 1.0;
    }
    let n = ds.n_rows() as f64;
    let missing: f64 = ds.feature_indices().map(|c| ds.missing_count(c) as f64 / n).sum();
    1.0 - missing / f as f64
}

pub fn feature_accuracy_cat(values: &[Category], ground_truth: &[Category]) -> Result<f64> {
    if values.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: ground_truth.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mismatches = values.iter().zip(ground_truth).filter(|(a, b)| a != b).count();
    Ok(1.0 - mismatches as f64 / values.len() as f64)
}

/// `1 - avg_dist / mean_gt`, unclamped: strong noise drives it below zero.
pub fn feature_accuracy_num(values: &[f64], ground_truth: &[f64]) -> Result<f64> {
    feature_accuracy_num_named(values, ground_truth, "<column>")
}

fn feature_accuracy_num_named(values: &[f64], ground_truth: &[f64], name: &str) -> Result<f64> {
    if values.len() != ground_truth.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: ground_truth.len(),
        });
    }
    if values.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = values.len() as f64;
    let mean_gt = ground_truth.iter().sum::<f64>() / n;
    if mean_gt == 0.0 {
        return Err(Error::ZeroGroundTruthMean(name.to_string()));
    }
    let avg_dist = values.iter().zip(ground_truth).map(|(v, g)| (g - v).abs()).sum::<f64>() / n;
    Ok(1.0 - avg_dist / mean_gt)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureAccuracy {
    pub categorical: f64,
    pub numerical: f64,
    /// Plain mean of the two, the single value plotted per level.
    pub mean: f64,
}

/// Averages per feature type. A type with no features reports 1.0.
pub fn feature_accuracy_report(pd: &PairedDataset) -> Result<FeatureAccuracy> {
    let gt = pd.ground_truth();
    let ds = &pd.current;
    let (mut cat_sum, mut cat_n, mut num_sum, mut num_n) = (0.0, 0usize, 0.0, 0usize);
    for col in ds.feature_indices() {
        match (ds.column(col), gt.column(col)) {
            (Column::Categorical(v), Column::Categorical(g)) => {
                cat_sum += feature_accuracy_cat(v, g)?;
                cat_n += 1;
            }
            (Column::Numerical(v), Column::Numerical(g)) => {
                num_sum += feature_accuracy_num_named(v, g, &ds.meta(col).name)?;
                num_n += 1;
            }
            _ => {}
        }
    }
    let categorical = if cat_n == 0 { 1.0 } else { cat_sum / cat_n as f64 };
    let numerical = if num_n == 0 { 1.0 } else { num_sum / num_n as f64 };
    Ok(FeatureAccuracy {
        categorical,
        numerical,
        mean: (categorical + numerical) / 2.0,
    })
}

/// Feature accuracy of the target column; numerical targets are clamped at 0.
pub fn target_accuracy(pd: &PairedDataset) -> Result<f64> {
    let t = pd.current.target_index();
    match (pd.current.column(t), pd.ground_truth().column(t)) {
        (Column::Categorical(v), Column::Categorical(g)) => feature_accuracy_cat(v, g),
        (Column::Numerical(v), Column::Numerical(g)) => {
            Ok(feature_accuracy_num_named(v, g, &pd.current.target_meta().name)?.max(0.0))
        }
        _ => Err(Error::Schema("target column kind differs from ground truth".into())),
    }
}

pub fn unique_rows(ds: &Dataset) -> usize {
    (0..ds.n_rows()).map(|r| ds.row_key(r)).collect::<HashSet<_>>().len()
}

/// `(unique_samples - 1) / (n - 1)` over full rows, target included.
pub fn uniqueness(ds: &Dataset) -> Result<f64> {
    let n = ds.n_rows();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "uniqueness needs at least 2 rows, got {n}"
        )));
    }
    Ok((unique_rows(ds) - 1) as f64 / (n - 1) as f64)
}

/// Sum of absolute class-size differences over unordered class pairs.
pub fn imbalance_of_counts(counts: &[usize]) -> u64 {
    let mut sorted: Vec<u64> = counts.iter().map(|&c| c as u64).collect();
    sorted.sort_unstable();
    let m = sorted.len() as i64;
    // For sorted sizes, class i is larger than i others and smaller than m-1-i.
    let total: i64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &c)| (2 * i as i64 - m + 1) * c as i64)
        .sum();
    total as u64
}

pub fn imbalance(ds: &Dataset) -> Result<u64> {
    let counts: Vec<usize> = ds.class_counts()?.into_values().collect();
    Ok(imbalance_of_counts(&counts))
}

/// Imbalance of the worst case: half the classes at `n_cmax`, the rest empty.
pub fn worst_case_imbalance(m: usize, n_cmax: usize) -> u64 {
    (m.div_ceil(2) * (m / 2) * n_cmax) as u64
}

/// `1 - ImBalance / epsilon`, with `n_cmax` the largest observed class.
pub fn balance(ds: &Dataset) -> Result<f64> {
    let counts: Vec<usize> = ds.class_counts()?.into_values().collect();
    let m = counts.len();
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "balance needs at least 2 classes, got {m}"
        )));
    }
    let eps = worst_case_imbalance(m, counts.iter().copied().max().unwrap_or(0));
    Ok((1.0 - imbalance_of_counts(&counts) as f64 / eps as f64).clamp(0.0, 1.0))
}

/// All scores for one dataset. Scores that need a ground truth or at least
/// two classes are absent when they cannot be computed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QualityReport {
    pub rows: usize,
    pub features: usize,
    pub consistency: f64,
    pub completeness: f64,
    pub c_f_accuracy: Option<f64>,
    pub n_f_accuracy: Option<f64>,
    pub feature_accuracy: Option<f64>,
    pub target_accuracy: Option<f64>,
    pub uniqueness: Option<f64>,
    pub balance: Option<f64>,
    pub imbalance: Option<u64>,
    pub epsilon: Option<u64>,
}

pub fn measure(ds: &Dataset, map: &RepresentationMap, ground_truth: Option<&Dataset>) -> Result<QualityReport> {
    let (c_f, n_f, fa, ta) = match ground_truth {
        Some(gt) => {
            let pd = PairedDataset::new(ds.clone(), gt.clone())?;
            let fa = feature_accuracy_report(&pd)?;
            (
                Some(fa.categorical),
                Some(fa.numerical),
                Some(fa.mean),
                Some(target_accuracy(&pd)?),
            )
        }
        None => (None, None, None, None),
    };
    let counts: Option<Vec<usize>> = ds.class_counts().ok().map(|c| c.into_values().collect());
    let (bal, imb, eps) = match &counts {
        Some(c) if c.len() >= 2 => {
            let eps = worst_case_imbalance(c.len(), c.iter().copied().max().unwrap_or(0));
            (Some(balance(ds)?), Some(imbalance_of_counts(c)), Some(eps))
        }
        Some(c) => (None, Some(imbalance_of_counts(c)), None),
        None => (None, None, None),
    };
    Ok(QualityReport {
        rows: ds.n_rows(),
        features: ds.n_features(),
        consistency: consistency(ds, map)?,
        completeness: completeness(ds),
        c_f_accuracy: c_f,
        n_f_accuracy: n_f,
        feature_accuracy: fa,
        target_accuracy: ta,
        uniqueness: uniqueness(ds).ok(),
        balance: bal,
        imbalance: imb,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::test_support::*;
    use crate::tabular::{snapshot_ground_truth, Value};

    fn cats(v: &[&str]) -> Vec<Category> {
        v.iter().map(|s| Category::from(*s)).collect()
    }

    #[test]
    fn inconsistency_ny_example() {
        let col = cats(&["NY", "NY", "NYC", "NY"]);
        let groups = vec![cats(&["NY", "NYC"])];
        assert_eq!(inconsistency(&col, &col, &groups).unwrap(), 0.25);
        assert_eq!(
            inconsistency(&col, &col, &[cats(&["NY"]), cats(&["NYC"])]).unwrap(),
            0.0
        );
        let same = cats(&["a", "a"]);
        assert_eq!(
            inconsistency(&same, &cats(&["a", "a1"]), &[cats(&["a", "a1"])]).unwrap(),
            0.0
        );
    }

    #[test]
    fn inconsistency_rejects_unknown_and_overlapping() {
        let col = cats(&["a", "b"]);
        assert!(inconsistency(&col, &col, &[cats(&["a", "zzz"])]).is_err());
        assert!(inconsistency(&col, &col, &[cats(&["a"]), cats(&["a", "b"])]).is_err());
    }

    #[test]
    fn consistency_averages_over_features() {
        let ds = build(vec![
            cat_col("p", &["x", "x1", "x", "x1"], false),
            cat_col("q", &["y", "y", "y", "y"], false),
            cat_col("t", &["a", "b", "a", "b"], true),
        ]);
        let mut map = RepresentationMap::default();
        map.groups.insert("p".into(), vec![cats(&["x", "x1"])]);
        map.groups.insert("q".into(), vec![cats(&["y"])]);
        assert_eq!(consistency(&ds, &map).unwrap(), 0.75);
        assert_eq!(consistency(&ds, &RepresentationMap::default()).unwrap(), 1.0);
    }

    #[test]
    fn completeness_five_sixths() {
        // 4 columns incl. target, 4 rows, 2 of the 12 feature cells missing.
        let (mut a, ca) = cat_col("a", &["x", "?", "x", "x"], false);
        a.placeholder = Some(Value::Cat("?".into()));
        let (mut b, cb) = num_col("b", &[1.0, 2.0, -1.0, 3.0], false);
        b.placeholder = Some(Value::Num(-1.0));
        let ds = build(vec![
            (a, ca),
            (b, cb),
            num_col("c", &[1.0, 2.0, 3.0, 4.0], false),
            cat_col("t", &["?", "?", "?", "?"], true),
        ]);
        assert!((completeness(&ds) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn completeness_extremes() {
        let (mut a, ca) = cat_col("a", &["?", "?"], false);
        a.placeholder = Some(Value::Cat("?".into()));
        let ds = build(vec![(a, ca), cat_col("t", &["x", "y"], true)]);
        assert_eq!(completeness(&ds), 0.0);
        let clean = build(vec![cat_col("a", &["x", "y"], false), cat_col("t", &["x", "y"], true)]);
        assert_eq!(completeness(&clean), 1.0);
    }

    #[test]
    fn categorical_accuracy_counts_mismatches() {
        let gt = cats(&["a"; 10]);
        let mut v = gt.clone();
        for c in v.iter_mut().take(3) {
            *c = "b".into();
        }
        assert_eq!(feature_accuracy_cat(&v, &gt).unwrap(), 0.7);
        assert_eq!(feature_accuracy_cat(&gt, &gt).unwrap(), 1.0);
        assert_eq!(feature_accuracy_cat(&cats(&["b"; 10]), &gt).unwrap(), 0.0);
        assert!(feature_accuracy_cat(&gt[..3], &gt).is_err());
    }

    #[test]
    fn numerical_accuracy_cases() {
        assert_eq!(feature_accuracy_num(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 1.0);
        let v = feature_accuracy_num(&[3.0, 1.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(feature_accuracy_num(&[10.0, 10.0], &[1.0, 1.0]).unwrap(), -8.0);
        assert!(matches!(
            feature_accuracy_num(&[1.0, -1.0], &[1.0, -1.0]),
            Err(Error::ZeroGroundTruthMean(_))
        ));
    }

    #[test]
    fn feature_accuracy_report_averages_per_type() {
        let gt = build(vec![
            cat_col("a", &["x", "x", "x", "x", "x"], false),
            cat_col("b", &["y", "y", "y", "y", "y"], false),
            cat_col("t", &["p", "p", "p", "p", "p"], true),
        ]);
        let cur = build(vec![
            cat_col("a", &["z", "x", "x", "x", "x"], false),
            cat_col("b", &["z", "z", "y", "y", "y"], false),
            cat_col("t", &["p", "p", "p", "p", "p"], true),
        ]);
        let pd = PairedDataset::new(cur, gt.clone()).unwrap();
        let fa = feature_accuracy_report(&pd).unwrap();
        assert!((fa.categorical - 0.7).abs() < 1e-15);
        assert_eq!(fa.numerical, 1.0);
        let clean = feature_accuracy_report(&snapshot_ground_truth(&gt)).unwrap();
        assert_eq!((clean.categorical, clean.numerical), (1.0, 1.0));
    }

    #[test]
    fn target_accuracy_clamps_numeric() {
        let gt = build(vec![num_col("x", &[1.0, 1.0], false), num_col("y", &[1.0, 1.0], true)]);
        // avg_dist 1.2 over mean 1.0 gives -0.2 before clamping
        let cur = build(vec![num_col("x", &[1.0, 1.0], false), num_col("y", &[2.2, -0.2], true)]);
        let pd = PairedDataset::new(cur, gt.clone()).unwrap();
        assert_eq!(target_accuracy(&pd).unwrap(), 0.0);
        assert_eq!(target_accuracy(&snapshot_ground_truth(&gt)).unwrap(), 1.0);

        let gtc = build(vec![num_col("x", &[1.0, 2.0], false), cat_col("t", &["a", "b"], true)]);
        let flipped = build(vec![num_col("x", &[1.0, 2.0], false), cat_col("t", &["b", "a"], true)]);
        assert_eq!(
            target_accuracy(&PairedDataset::new(flipped, gtc).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn uniqueness_cases() {
        let distinct = build(vec![
            num_col("x", &[1.0, 2.0, 3.0], false),
            cat_col("t", &["a", "a", "a"], true),
        ]);
        assert_eq!(uniqueness(&distinct).unwrap(), 1.0);
        let same = build(vec![
            num_col("x", &[1.0, 1.0, 1.0], false),
            cat_col("t", &["a", "a", "a"], true),
        ]);
        assert_eq!(uniqueness(&same).unwrap(), 0.0);
        let one = build(vec![num_col("x", &[1.0], false), cat_col("t", &["a"], true)]);
        assert!(uniqueness(&one).is_err());
        // the target participates in row identity
        let by_target = build(vec![num_col("x", &[1.0, 1.0], false), cat_col("t", &["a", "b"], true)]);
        assert_eq!(uniqueness(&by_target).unwrap(), 1.0);
    }

    #[test]
    fn imbalance_enumerates_pairs() {
        assert_eq!(imbalance_of_counts(&[60, 100, 140]), 160);
        assert_eq!(imbalance_of_counts(&[5, 5, 5]), 0);
        assert_eq!(imbalance_of_counts(&[42]), 0);
        assert_eq!(worst_case_imbalance(3, 140), 280);
    }

    fn labelled(counts: &[(&str, usize)]) -> Dataset {
        let labels: Vec<&str> = counts.iter().flat_map(|(l, c)| std::iter::repeat_n(*l, *c)).collect();
        let xs: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        build(vec![num_col("x", &xs, false), cat_col("t", &labels, true)])
    }

    #[test]
    fn balance_cases() {
        assert_eq!(balance(&labelled(&[("a", 10), ("b", 10), ("c", 10)])).unwrap(), 1.0);
        let b = balance(&labelled(&[("a", 60), ("b", 100), ("c", 140)])).unwrap();
        assert!((b - (1.0 - 160.0 / 280.0)).abs() < 1e-15);
        assert_eq!(balance(&labelled(&[("a", 7), ("b", 7)])).unwrap(), 1.0);
        assert!(balance(&labelled(&[("a", 7)])).is_err());
        let reg = build(vec![num_col("x", &[1.0, 2.0], false), num_col("y", &[1.0, 2.0], true)]);
        assert!(matches!(imbalance(&reg), Err(Error::NotClassified)));
    }
}

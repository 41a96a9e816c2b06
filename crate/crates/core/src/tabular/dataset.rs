use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A categorical value. Integer-based categoricals keep their integer form so
/// fresh representations can be appended after the maximum existing one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Category {
    Int(i64),
    Text(String),
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Category::Int(v) => write!(f, "{v}"),
            Category::Text(s) => f.write_str(s),
        }
    }
}

impl From<&str> for Category {
    fn from(s: &str) -> Self {
        Category::Text(s.to_string())
    }
}

impl From<i64> for Category {
    fn from(v: i64) -> Self {
        Category::Int(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CategoryBase {
    #[default]
    Text,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum FeatureKind {
    /// `domain` holds every known value of the column (sorted, placeholder
    /// excluded). Polluters that mint new values extend it.
    Categorical {
        base: CategoryBase,
        domain: Vec<Category>,
    },
    Numerical,
    /// Opaque text; never polluted and always consistent.
    Date,
}

impl FeatureKind {
    pub fn is_categorical(&self) -> bool {
        matches!(self, FeatureKind::Categorical { .. })
    }

    pub fn is_numerical(&self) -> bool {
        matches!(self, FeatureKind::Numerical)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Categorical { .. } => "categorical",
            FeatureKind::Numerical => "numerical",
            FeatureKind::Date => "date",
        }
    }
}

/// A single typed cell value, used for placeholders and pollution logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Cat(Category),
    Num(f64),
    Date(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Cat(c) => write!(f, "{c}"),
            Value::Num(v) => write!(f, "{v}"),
            Value::Date(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// Stand-in for a missing entry; lies outside the feature's domain.
    pub placeholder: Option<Value>,
    pub is_target: bool,
}

impl ColumnMeta {
    pub fn categorical_placeholder(&self) -> Option<&Category> {
        match &self.placeholder {
            Some(Value::Cat(c)) => Some(c),
            _ => None,
        }
    }

    pub fn numerical_placeholder(&self) -> Option<f64> {
        match &self.placeholder {
            Some(Value::Num(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn domain(&self) -> Option<&[Category]> {
        match &self.kind {
            FeatureKind::Categorical { domain, .. } => Some(domain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Categorical(Vec<Category>),
    Numerical(Vec<f64>),
    Date(Vec<String>),
}

impl Column {
    pub fn len(&self) -> usize {
        match self {
            Column::Categorical(v) => v.len(),
            Column::Numerical(v) => v.len(),
            Column::Date(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, row: usize) -> Value {
        match self {
            Column::Categorical(v) => Value::Cat(v[row].clone()),
            Column::Numerical(v) => Value::Num(v[row]),
            Column::Date(v) => Value::Date(v[row].clone()),
        }
    }

    pub fn as_categorical(&self) -> Option<&[Category]> {
        match self {
            Column::Categorical(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_numerical(&self) -> Option<&[f64]> {
        match self {
            Column::Numerical(v) => Some(v),
            _ => None,
        }
    }

    fn select(&self, rows: &[usize]) -> Column {
        match self {
            Column::Categorical(v) => Column::Categorical(rows.iter().map(|&r| v[r].clone()).collect()),
            Column::Numerical(v) => Column::Numerical(rows.iter().map(|&r| v[r]).collect()),
            Column::Date(v) => Column::Date(rows.iter().map(|&r| v[r].clone()).collect()),
        }
    }

    fn kind_matches(&self, kind: &FeatureKind) -> bool {
        matches!(
            (self, kind),
            (Column::Categorical(_), FeatureKind::Categorical { .. })
                | (Column::Numerical(_), FeatureKind::Numerical)
                | (Column::Date(_), FeatureKind::Date)
        )
    }
}

/// Continuous target values kept alongside a discretized target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetBins {
    pub bin_step: f64,
    pub original: Vec<f64>,
}

impl TargetBins {
    /// Half-open value interval covered by a class id.
    pub fn interval(&self, class_id: i64) -> (f64, f64) {
        let lo = class_id as f64 * self.bin_step;
        (lo, lo + self.bin_step)
    }
}

/// Hashable image of one cell, used for exact row equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CellKey {
    Int(i64),
    Float(u64),
    Text(String),
}

/// Column-major table with exactly one target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<ColumnMeta>,
    data: Vec<Column>,
    n_rows: usize,
    target: usize,
    target_bins: Option<TargetBins>,
}

impl Dataset {
    pub fn new(columns: Vec<ColumnMeta>, data: Vec<Column>) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::Schema(format!(
                "{} column declarations for {} data columns",
                columns.len(),
                data.len()
            )));
        }
        let targets: Vec<usize> = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_target)
            .map(|(i, _)| i)
            .collect();
        if targets.len() != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one target column, found {}",
                targets.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name {:?}", c.name)));
            }
        }
        let n_rows = data.first().map(Column::len).unwrap_or(0);
        if n_rows == 0 {
            return Err(Error::EmptyDataset);
        }
        for (meta, col) in columns.iter().zip(&data) {
            if col.len() != n_rows {
                return Err(Error::column(
                    &meta.name,
                    format!("has {} cells, expected {}", col.len(), n_rows),
                ));
            }
            if !col.kind_matches(&meta.kind) {
                return Err(Error::column(
                    &meta.name,
                    format!("data does not match declared kind {}", meta.kind.name()),
                ));
            }
        }
        Ok(Dataset {
            columns,
            data,
            n_rows,
            target: targets[0],
            target_bins: None,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Number of non-target features.
    pub fn n_features(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn meta(&self, idx: usize) -> &ColumnMeta {
        &self.columns[idx]
    }

    pub fn column(&self, idx: usize) -> &Column {
        &self.data[idx]
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target_meta(&self) -> &ColumnMeta {
        &self.columns[self.target]
    }

    pub fn target_column(&self) -> &Column {
        &self.data[self.target]
    }

    pub fn target_bins(&self) -> Option<&TargetBins> {
        self.target_bins.as_ref()
    }

    /// Indices of the non-target columns, in column order.
    pub fn feature_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.len()).filter(move |&i| i != self.target)
    }

    pub fn categorical_features(&self) -> Vec<usize> {
        self.feature_indices()
            .filter(|&i| self.columns[i].kind.is_categorical())
            .collect()
    }

    pub fn numerical_features(&self) -> Vec<usize> {
        self.feature_indices()
            .filter(|&i| self.columns[i].kind.is_numerical())
            .collect()
    }

    /// Class labels of a categorical target.
    pub fn class_labels(&self) -> Result<&[Category]> {
        self.target_column().as_categorical().ok_or(Error::NotClassified)
    }

    /// Per-class row counts, ordered by class value.
    pub fn class_counts(&self) -> Result<BTreeMap<Category, usize>> {
        let mut counts = BTreeMap::new();
        for c in self.class_labels()? {
            *counts.entry(c.clone()).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// Row indices per class, ordered by class value.
    pub fn class_rows(&self) -> Result<BTreeMap<Category, Vec<usize>>> {
        let mut rows: BTreeMap<Category, Vec<usize>> = BTreeMap::new();
        for (i, c) in self.class_labels()?.iter().enumerate() {
            rows.entry(c.clone()).or_default().push(i);
        }
        Ok(rows)
    }

    pub fn is_missing(&self, col: usize, row: usize) -> bool {
        match (&self.columns[col].placeholder, &self.data[col]) {
            (Some(Value::Cat(p)), Column::Categorical(v)) => &v[row] == p,
            (Some(Value::Num(p)), Column::Numerical(v)) => v[row] == *p,
            (Some(Value::Date(p)), Column::Date(v)) => &v[row] == p,
            _ => false,
        }
    }

    pub fn missing_count(&self, col: usize) -> usize {
        (0..self.n_rows).filter(|&r| self.is_missing(col, r)).count()
    }

    /// Distinct non-placeholder values currently present in a categorical column.
    pub fn observed_domain(&self, col: usize) -> Vec<Category> {
        let Column::Categorical(values) = &self.data[col] else {
            return Vec::new();
        };
        let placeholder = self.columns[col].categorical_placeholder();
        let set: BTreeSet<&Category> = values.iter().filter(|v| Some(*v) != placeholder).collect();
        set.into_iter().cloned().collect()
    }

    pub fn row_key(&self, row: usize) -> Vec<CellKey> {
        self.data
            .iter()
            .map(|col| match col {
                Column::Categorical(v) => match &v[row] {
                    Category::Int(i) => CellKey::Int(*i),
                    Category::Text(s) => CellKey::Text(s.clone()),
                },
                Column::Numerical(v) => CellKey::Float(normalize_zero(v[row]).to_bits()),
                Column::Date(v) => CellKey::Text(v[row].clone()),
            })
            .collect()
    }

    /// New dataset holding the given rows in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(Dataset {
            columns: self.columns.clone(),
            data: self.data.iter().map(|c| c.select(rows)).collect(),
            n_rows: rows.len(),
            target: self.target,
            target_bins: self.target_bins.as_ref().map(|b| TargetBins {
                bin_step: b.bin_step,
                original: rows.iter().map(|&r| b.original[r]).collect(),
            }),
        })
    }

    /// True when both datasets share names, kinds and column order.
    pub fn same_schema(&self, other: &Dataset) -> bool {
        self.target == other.target
            && self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name && a.kind.name() == b.kind.name())
    }

    pub(crate) fn column_mut(&mut self, idx: usize) -> &mut Column {
        &mut self.data[idx]
    }

    pub(crate) fn meta_mut(&mut self, idx: usize) -> &mut ColumnMeta {
        &mut self.columns[idx]
    }

    pub(crate) fn set_target_bins(&mut self, bins: Option<TargetBins>) {
        self.target_bins = bins;
    }
}

fn normalize_zero(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

/// A dataset together with the clean snapshot it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedDataset {
    pub current: Dataset,
    ground_truth: Dataset,
}

impl PairedDataset {
    pub fn new(current: Dataset, ground_truth: Dataset) -> Result<Self> {
        if !current.same_schema(&ground_truth) {
            return Err(Error::Schema("current and ground truth schemas differ".into()));
        }
        if current.n_rows() != ground_truth.n_rows() {
            return Err(Error::LengthMismatch {
                left: current.n_rows(),
                right: ground_truth.n_rows(),
            });
        }
        Ok(PairedDataset { current, ground_truth })
    }

    pub fn ground_truth(&self) -> &Dataset {
        &self.ground_truth
    }
}

pub fn snapshot_ground_truth(ds: &Dataset) -> PairedDataset {
    PairedDataset {
        current: ds.clone(),
        ground_truth: ds.clone(),
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn cat_col(name: &str, values: &[&str], target: bool) -> (ColumnMeta, Column) {
        let data: Vec<Category> = values.iter().map(|v| Category::from(*v)).collect();
        let domain: BTreeSet<Category> = data.iter().cloned().collect();
        (
            ColumnMeta {
                name: name.into(),
                kind: FeatureKind::Categorical {
                    base: CategoryBase::Text,
                    domain: domain.into_iter().collect(),
                },
                placeholder: None,
                is_target: target,
            },
            Column::Categorical(data),
        )
    }

    pub fn num_col(name: &str, values: &[f64], target: bool) -> (ColumnMeta, Column) {
        (
            ColumnMeta {
                name: name.into(),
                kind: FeatureKind::Numerical,
                placeholder: None,
                is_target: target,
            },
            Column::Numerical(values.to_vec()),
        )
    }

    pub fn build(cols: Vec<(ColumnMeta, Column)>) -> Dataset {
        let (metas, data): (Vec<_>, Vec<_>) = cols.into_iter().unzip();
        Dataset::new(metas, data).unwrap()
    }
}

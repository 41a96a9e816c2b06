use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::dataset::{Category, CategoryBase, Column, Dataset, FeatureKind, TargetBins};
use crate::error::{Error, Result};

/// Dense row-major matrix of model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map(Vec::len).unwrap_or(0);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn rows_iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }
}

/// Provenance of one encoded column.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EncodedColumn {
    Numeric { source: String },
    Indicator { source: String, value: Category },
}

#[derive(Debug, Clone, PartialEq)]
enum FeatureEncoding {
    Numeric(String),
    OneHot(String, Vec<Category>),
}

/// One-hot encoder fitted on the categories observed in one or more datasets,
/// so train and test matrices share a column layout. Placeholders count as a
/// category of their own; date columns and the target are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotEncoder {
    features: Vec<FeatureEncoding>,
}

impl OneHotEncoder {
    pub fn fit(datasets: &[&Dataset]) -> Result<Self> {
        let first = datasets
            .first()
            .ok_or_else(|| Error::InvalidParameter("no dataset to fit".into()))?;
        if datasets.iter().any(|d| !d.same_schema(first)) {
            return Err(Error::Schema("datasets passed to the encoder differ in schema".into()));
        }
        let mut features = Vec::new();
        for idx in first.feature_indices() {
            let meta = first.meta(idx);
            match &meta.kind {
                FeatureKind::Numerical => features.push(FeatureEncoding::Numeric(meta.name.clone())),
                FeatureKind::Categorical { .. } => {
                    let mut seen = BTreeSet::new();
                    for ds in datasets {
                        if let Column::Categorical(v) = ds.column(idx) {
                            seen.extend(v.iter().cloned());
                        }
                    }
                    features.push(FeatureEncoding::OneHot(meta.name.clone(), seen.into_iter().collect()));
                }
                FeatureKind::Date => {}
            }
        }
        Ok(OneHotEncoder { features })
    }

    pub fn width(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                FeatureEncoding::Numeric(_) => 1,
                FeatureEncoding::OneHot(_, cats) => cats.len(),
            })
            .sum()
    }

    pub fn column_map(&self) -> Vec<EncodedColumn> {
        let mut out = Vec::with_capacity(self.width());
        for f in &self.features {
            match f {
                FeatureEncoding::Numeric(name) => out.push(EncodedColumn::Numeric { source: name.clone() }),
                FeatureEncoding::OneHot(name, cats) => out.extend(cats.iter().map(|c| EncodedColumn::Indicator {
                    source: name.clone(),
                    value: c.clone(),
                })),
            }
        }
        out
    }

    /// Encodes `ds`. Categories unseen at fit time encode as all zeros.
    pub fn transform(&self, ds: &Dataset) -> Result<Matrix> {
        let mut m = Matrix::zeros(ds.n_rows(), self.width());
        let mut offset = 0;
        for f in &self.features {
            match f {
                FeatureEncoding::Numeric(name) => {
                    let idx = ds
                        .column_index(name)
                        .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))?;
                    let values = ds
                        .column(idx)
                        .as_numerical()
                        .ok_or_else(|| Error::column(name, "expected numerical"))?;
                    for (r, v) in values.iter().enumerate() {
                        m.set(r, offset, *v);
                    }
                    offset += 1;
                }
                FeatureEncoding::OneHot(name, cats) => {
                    let idx = ds
                        .column_index(name)
                        .ok_or_else(|| Error::Schema(format!("missing column {name:?}")))?;
                    let values = ds
                        .column(idx)
                        .as_categorical()
                        .ok_or_else(|| Error::column(name, "expected categorical"))?;
                    let lookup: BTreeMap<&Category, usize> = cats.iter().enumerate().map(|(i, c)| (c, i)).collect();
                    for (r, v) in values.iter().enumerate() {
                        if let Some(&j) = lookup.get(v) {
                            m.set(r, offset + j, 1.0);
                        }
                    }
                    offset += cats.len();
                }
            }
        }
        Ok(m)
    }
}

pub fn one_hot_encode(ds: &Dataset) -> Result<(Matrix, Vec<EncodedColumn>)> {
    let enc = OneHotEncoder::fit(&[ds])?;
    Ok((enc.transform(ds)?, enc.column_map()))
}

/// Replaces a numerical target by class ids `floor(value / bin_step)`,
/// keeping the continuous values alongside.
pub fn discretize_target(ds: &Dataset, bin_step: f64) -> Result<Dataset> {
    if !(bin_step > 0.0 && bin_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bin_step must be positive, got {bin_step}"
        )));
    }
    let t = ds.target_index();
    let values = ds
        .target_column()
        .as_numerical()
        .ok_or_else(|| Error::column(&ds.target_meta().name, "target must be numerical to discretize"))?;
    let classes: Vec<Category> = values
        .iter()
        .map(|v| Category::Int((v / bin_step).floor() as i64))
        .collect();
    let domain: BTreeSet<Category> = classes.iter().cloned().collect();
    let mut out = ds.clone();
    *out.column_mut(t) = Column::Categorical(classes);
    let meta = out.meta_mut(t);
    meta.kind = FeatureKind::Categorical {
        base: CategoryBase::Integer,
        domain: domain.into_iter().collect(),
    };
    meta.placeholder = None;
    out.set_target_bins(Some(TargetBins {
        bin_step,
        original: values.to_vec(),
    }));
    Ok(out)
}

/// Undoes [`discretize_target`]: the target becomes numerical again, holding
/// the continuous values of the rows currently present.
pub fn restore_numeric_target(ds: &Dataset) -> Result<Dataset> {
    let bins = ds
        .target_bins()
        .ok_or_else(|| Error::column(&ds.target_meta().name, "target was not discretized"))?;
    let values = bins.original.clone();
    let t = ds.target_index();
    let mut out = ds.clone();
    *out.column_mut(t) = Column::Numerical(values);
    out.meta_mut(t).kind = FeatureKind::Numerical;
    out.set_target_bins(None);
    Ok(out)
}

/// Removes rows whose class has fewer than `min_count` rows.
pub fn drop_small_classes(ds: &Dataset, min_count: usize) -> Result<Dataset> {
    let counts = ds.class_counts()?;
    let keep: Vec<usize> = ds
        .class_labels()?
        .iter()
        .enumerate()
        .filter(|(_, c)| counts[*c] >= min_count)
        .map(|(i, _)| i)
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyResult(format!("no class has at least {min_count} rows")));
    }
    let mut out = ds.select_rows(&keep)?;
    let t = out.target_index();
    let domain = out.observed_domain(t);
    if let FeatureKind::Categorical { domain: d, .. } = &mut out.meta_mut(t).kind {
        *d = domain;
    }
    Ok(out)
}

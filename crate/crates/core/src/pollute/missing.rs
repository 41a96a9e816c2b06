use serde::{Deserialize, Serialize};

use super::{fraction_to_count, FeatureLevels, LogEntry, Pollution, PollutionLog};
use crate::error::{Error, Result};
use crate::tabular::{Column, Dataset, RngStream, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletenessSpec {
    /// Target share of missing cells per feature.
    pub levels: FeatureLevels,
}

/// Injects placeholders completely at random until every feature reaches its
/// target missing share. Already-missing cells count towards the target.
pub fn pollute_completeness(ds: &Dataset, spec: &CompletenessSpec, rng: &RngStream) -> Result<Pollution> {
    spec.levels.validate_fractions()?;
    let n = ds.n_rows();
    let mut out = ds.clone();
    let mut log = PollutionLog::default();

    for col in ds.feature_indices() {
        let meta = ds.meta(col);
        let level = spec.levels.level(&meta.name);
        let wanted = fraction_to_count(level, n);
        let present: Vec<usize> = (0..n).filter(|&r| !ds.is_missing(col, r)).collect();
        let existing = n - present.len();
        if wanted < existing {
            return Err(Error::column(
                &meta.name,
                format!("already has {existing} missing cells, more than the requested {wanted}"),
            ));
        }
        let inject = wanted - existing;
        if inject == 0 {
            continue;
        }
        let placeholder = meta
            .placeholder
            .clone()
            .ok_or_else(|| Error::column(&meta.name, "no placeholder declared; cannot inject missing values"))?;

        let mut stream = rng.child(format!("feature:{}", meta.name));
        let order = stream.permutation(present.len());
        let mut rows: Vec<usize> = order[..inject].iter().map(|&i| present[i]).collect();
        rows.sort_unstable();
        for &row in &rows {
            let old = ds.column(col).value(row);
            match (out.column_mut(col), &placeholder) {
                (Column::Categorical(v), Value::Cat(p)) => v[row] = p.clone(),
                (Column::Numerical(v), Value::Num(p)) => v[row] = *p,
                (Column::Date(v), Value::Date(p)) => v[row] = p.clone(),
                _ => return Err(Error::column(&meta.name, "placeholder type does not match column")),
            }
            log.entries.push(LogEntry::Cell {
                row,
                column: meta.name.clone(),
                old,
                new: placeholder.clone(),
            });
        }
    }
    Ok(Pollution { dataset: out, log })
}

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_fraction, fraction_to_count, LogEntry, Pollution, PollutionLog};
use crate::error::{Error, Result};
use crate::quality::RepresentationMap;
use crate::tabular::{Category, CategoryBase, Column, Dataset, FeatureKind, RngStream, Value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySpec {
    /// Share of rows rewritten in every categorical feature.
    pub fraction: f64,
    /// Representations per original value, the original included.
    pub representations: usize,
}

/// Mints `k - 1` fresh representations for every value of `domain`.
/// Text values get an ascending numeric suffix; integers continue after the
/// largest value in use.
fn fresh_representations(
    domain: &[Category],
    base: CategoryBase,
    placeholder: Option<&Category>,
    k: usize,
) -> BTreeMap<Category, Vec<Category>> {
    let mut taken: BTreeSet<Category> = domain.iter().cloned().collect();
    if let Some(p) = placeholder {
        taken.insert(p.clone());
    }
    let mut out = BTreeMap::new();
    match base {
        CategoryBase::Integer => {
            let mut next = taken
                .iter()
                .filter_map(|c| match c {
                    Category::Int(i) => Some(*i),
                    Category::Text(_) => None,
                })
                .max()
                .unwrap_or(0)
                + 1;
            for v in domain {
                let reps = (1..k)
                    .map(|_| {
                        let r = Category::Int(next);
                        next += 1;
                        r
                    })
                    .collect();
                out.insert(v.clone(), reps);
            }
        }
        CategoryBase::Text => {
            for v in domain {
                let stem = v.to_string();
                let mut suffix = 1u64;
                let mut reps = Vec::with_capacity(k - 1);
                while reps.len() < k - 1 {
                    let candidate = Category::Text(format!("{stem}{suffix}"));
                    suffix += 1;
                    if taken.insert(candidate.clone()) {
                        reps.push(candidate);
                    }
                }
                out.insert(v.clone(), reps);
            }
        }
    }
    out
}

/// Rewrites a share of every categorical feature with fresh, semantically
/// equivalent representations and returns the map of equivalence groups.
pub fn pollute_consistent_representation(
    ds: &Dataset,
    spec: &ConsistencySpec,
    rng: &RngStream,
) -> Result<(Pollution, RepresentationMap)> {
    check_fraction(spec.fraction, "consistency pollution fraction")?;
    if spec.representations < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 representations per value, got {}",
            spec.representations
        )));
    }
    let features = ds.categorical_features();
    if features.is_empty() {
        return Err(Error::InvalidParameter("dataset has no categorical features".into()));
    }

    let n = ds.n_rows();
    let count = fraction_to_count(spec.fraction, n);
    let mut out = ds.clone();
    let mut log = PollutionLog::default();
    let mut map = RepresentationMap::default();

    for col in features {
        let meta = ds.meta(col).clone();
        let FeatureKind::Categorical { base, domain } = &meta.kind else {
            unreachable!()
        };
        let mut known: BTreeSet<Category> = domain.iter().cloned().collect();
        known.extend(ds.observed_domain(col));
        let known: Vec<Category> = known.into_iter().collect();
        let placeholder = meta.categorical_placeholder();
        let reps = fresh_representations(&known, *base, placeholder, spec.representations);

        let mut stream = rng.child(format!("feature:{}", meta.name));
        let order = stream.permutation(n);
        let mut used: BTreeMap<Category, BTreeSet<Category>> = BTreeMap::new();
        let Column::Categorical(values) = out.column_mut(col) else {
            unreachable!()
        };
        for &row in &order[..count] {
            let original = ds.column(col).as_categorical().unwrap()[row].clone();
            if Some(&original) == placeholder {
                // a missing entry has no representation to vary
                continue;
            }
            let options = &reps[&original];
            let pick = options[stream.random_range(0..options.len())].clone();
            used.entry(original.clone()).or_default().insert(pick.clone());
            values[row] = pick.clone();
            log.entries.push(LogEntry::Cell {
                row,
                column: meta.name.clone(),
                old: Value::Cat(original),
                new: Value::Cat(pick),
            });
        }

        let groups: Vec<Vec<Category>> = known
            .iter()
            .map(|v| {
                let mut g = vec![v.clone()];
                if let Some(u) = used.get(v) {
                    g.extend(u.iter().cloned());
                }
                g
            })
            .collect();
        let new_domain: BTreeSet<Category> = groups.iter().flatten().cloned().collect();
        if let FeatureKind::Categorical { domain, .. } = &mut out.meta_mut(col).kind {
            *domain = new_domain.into_iter().collect();
        }
        map.groups.insert(meta.name.clone(), groups);
    }
    Ok((Pollution { dataset: out, log }, map))
}

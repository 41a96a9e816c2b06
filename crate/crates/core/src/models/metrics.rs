use std::collections::BTreeMap;

use crate::error::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(())
}

/// Unweighted mean of per-class F1 over the classes that occur in `y_true`.
/// A class never predicted and never hit scores 0.
pub fn macro_f1<T: Ord>(y_true: &[T], y_pred: &[T]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    // (true positives, false positives, false negatives)
    let mut stats: BTreeMap<&T, (usize, usize, usize)> = y_true.iter().map(|c| (c, (0, 0, 0))).collect();
    for (t, p) in y_true.iter().zip(y_pred) {
        if t == p {
            stats.get_mut(t).unwrap().0 += 1;
        } else {
            stats.get_mut(t).unwrap().2 += 1;
            if let Some(s) = stats.get_mut(p) {
                s.1 += 1;
            }
        }
    }
    let total: f64 = stats
        .values()
        .map(|&(tp, fp, fn_)| {
            if tp == 0 {
                0.0
            } else {
                2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
            }
        })
        .sum();
    Ok(total / stats.len() as f64)
}

/// Coefficient of determination; negative when worse than the mean.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> Result<f64> {
    check_lengths(y_true.len(), y_pred.len())?;
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::InvalidParameter("R² is undefined for a constant target".into()));
    }
    let ss_res: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Contingency table of two labelings plus its marginals.
struct Contingency {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    cells: Vec<(usize, usize, usize)>,
}

impl Contingency {
    fn new<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Self {
        let ids_a = dense_ids(a);
        let ids_b = dense_ids(b);
        let mut rows = vec![0; ids_a.iter().max().map_or(0, |m| m + 1)];
        let mut cols = vec![0; ids_b.iter().max().map_or(0, |m| m + 1)];
        let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (&i, &j) in ids_a.iter().zip(&ids_b) {
            rows[i] += 1;
            cols[j] += 1;
            *cells.entry((i, j)).or_insert(0) += 1;
        }
        Contingency {
            n: a.len(),
            rows,
            cols,
            cells: cells.into_iter().map(|((i, j), c)| (i, j, c)).collect(),
        }
    }

    fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        self.cells
            .iter()
            .map(|&(i, j, c)| {
                let c = c as f64;
                c / n * (n * c / (self.rows[i] as f64 * self.cols[j] as f64)).ln()
            })
            .sum()
    }

    /// Each row meets one column and each column one row: same partition.
    fn is_identical(&self) -> bool {
        self.cells.len() == self.rows.len() && self.cells.len() == self.cols.len()
    }
}

fn dense_ids<T: Ord>(labels: &[T]) -> Vec<usize> {
    let mut map: BTreeMap<&T, usize> = BTreeMap::new();
    for l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    labels.iter().map(|l| map[l]).collect()
}

fn entropy(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information of two labelings, in nats.
pub fn mutual_information<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    Ok(Contingency::new(a, b).mutual_information())
}

/// Expected mutual information of two labelings with the given cluster
/// sizes when one of them is randomly permuted (hypergeometric model).
pub fn expected_mutual_information(rows: &[usize], cols: &[usize]) -> f64 {
    let n: usize = rows.iter().sum();
    let log_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in rows {
        for &b in cols {
            let lo = (a + b).saturating_sub(n).max(1);
            let hi = a.min(b);
            let fixed = log_fact[a] + log_fact[b] + log_fact[n - a] + log_fact[n - b] - log_fact[n];
            for nij in lo..=hi {
                let log_p = fixed - log_fact[nij] - log_fact[a - nij] - log_fact[b - nij] - log_fact[n + nij - a - b];
                let x = nij as f64;
                emi += x / nf * (nf * x / (a as f64 * b as f64)).ln() * log_p.exp();
            }
        }
    }
    emi
}

/// Adjusted mutual information, normalised by the arithmetic mean of the two
/// entropies. Identical partitions (up to relabelling) score exactly 1.
pub fn adjusted_mutual_information<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    check_lengths(a.len(), b.len())?;
    let table = Contingency::new(a, b);
    if table.is_identical() {
        return Ok(1.0);
    }
    let mi = table.mutual_information();
    let emi = expected_mutual_information(&table.rows, &table.cols);
    let norm = (entropy(&table.rows, table.n) + entropy(&table.cols, table.n)) / 2.0;
    let mut denom = norm - emi;
    // keep the sign while avoiding a division by zero
    denom = if denom < 0.0 {
        denom.min(-f64::EPSILON)
    } else {
        denom.max(f64::EPSILON)
    };
    Ok((mi - emi) / denom)
}

use crate::error::{Error, Result};
use crate::tabular::{Category, Matrix};

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean k-nearest-neighbour majority vote. Equal distances are broken
/// by training row index and tied votes by the smallest class.
pub fn knn_classify(train: &Matrix, labels: &[Category], test: &Matrix, k: usize) -> Result<Vec<Category>> {
    if train.n_rows() != labels.len() {
        return Err(Error::LengthMismatch {
            left: train.n_rows(),
            right: labels.len(),
        });
    }
    if k == 0 || k > train.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must lie in 1..={} (training rows)",
            train.n_rows()
        )));
    }
    if train.n_cols() != test.n_cols() {
        return Err(Error::LengthMismatch {
            left: train.n_cols(),
            right: test.n_cols(),
        });
    }
    let mut classes: Vec<&Category> = labels.iter().collect();
    classes.sort();
    classes.dedup();
    let ids: Vec<usize> = labels.iter().map(|l| classes.binary_search(&l).unwrap()).collect();

    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let mut dist: Vec<(f64, usize)> = Vec::with_capacity(train.n_rows());
    let mut votes = vec![0usize; classes.len()];
    let mut out = Vec::with_capacity(test.n_rows());
    for query in test.rows_iter() {
        dist.clear();
        dist.extend(
            train
                .rows_iter()
                .enumerate()
                .map(|(i, r)| (squared_distance(query, r), i)),
        );
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_distance);
        }
        votes.iter_mut().for_each(|v| *v = 0);
        for &(_, i) in &dist[..k] {
            votes[ids[i]] += 1;
        }
        let best = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(c, _)| c)
            .expect("at least one class");
        out.push(classes[best].clone());
    }
    Ok(out)
}

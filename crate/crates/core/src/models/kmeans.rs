use rand::Rng;

use crate::error::{Error, Result};
use crate::tabular::{Matrix, RngStream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub k: usize,
    pub max_iter: usize,
    pub n_init: usize,
}

impl KMeansParams {
    pub fn new(k: usize) -> Self {
        KMeansParams {
            k,
            max_iter: 100,
            n_init: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares of the final assignment.
    pub inertia: f64,
    /// Within-cluster sum of squares after every assignment step of the
    /// winning restart.
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means++ seeding: each further centre is drawn with probability
/// proportional to its squared distance to the nearest chosen centre.
fn seed_centroids(x: &Matrix, k: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    let mut centroids = vec![x.row(rng.random_range(0..n)).to_vec()];
    let mut nearest: Vec<f64> = x.rows_iter().map(|r| sq_dist(r, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = x.row(pick).to_vec();
        for (i, r) in x.rows_iter().enumerate() {
            nearest[i] = nearest[i].min(sq_dist(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid per row (ties to the lower index) and the objective.
fn assign(x: &Matrix, centroids: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut total = 0.0;
    for (i, r) in x.rows_iter().enumerate() {
        let mut best = (f64::INFINITY, 0);
        for (c, centre) in centroids.iter().enumerate() {
            let d = sq_dist(r, centre);
            if d < best.0 {
                best = (d, c);
            }
        }
        labels[i] = best.1;
        dists[i] = best.0;
        total += best.0;
    }
    total
}

fn lloyd(x: &Matrix, params: &KMeansParams, rng: &mut RngStream) -> KMeansResult {
    let (n, d, k) = (x.n_rows(), x.n_cols(), params.k);
    let mut centroids = seed_centroids(x, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut next = vec![0; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..params.max_iter.max(1) {
        let inertia = assign(x, &centroids, &mut next, &mut dists);
        history.push(inertia);
        if next == labels {
            break;
        }
        labels.clone_from(&next);

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (i, r) in x.rows_iter().enumerate() {
            counts[labels[i]] += 1;
            sums[labels[i]].iter_mut().zip(r).for_each(|(s, v)| *s += v);
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            } else {
                // reseed an empty cluster at the worst-served point
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("k <= n");
                taken[far] = true;
                dists[far] = 0.0;
                centroids[c] = x.row(far).to_vec();
            }
        }
    }
    let inertia = *history.last().expect("at least one iteration");
    KMeansResult {
        labels: next,
        centroids,
        inertia,
        history,
    }
}

/// Best of `n_init` k-means++ restarts by within-cluster sum of squares.
/// Restart `i` draws from the child stream `"init:i"`.
pub fn kmeans(x: &Matrix, params: &KMeansParams, rng: &RngStream) -> Result<KMeansResult> {
    if params.k == 0 || params.k > x.n_rows() {
        return Err(Error::InvalidParameter(format!(
            "k = {} must lie in 1..={} (rows)",
            params.k,
            x.n_rows()
        )));
    }
    if params.n_init == 0 {
        return Err(Error::InvalidParameter("n_init must be at least 1".into()));
    }
    let mut best: Option<KMeansResult> = None;
    for i in 0..params.n_init {
        let run = lloyd(x, params, &mut rng.child(format!("init:{i}")));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("n_init >= 1"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::metrics::adjusted_mutual_information;
    use crate::tabular::derive_rng;

    fn blobs() -> (Matrix, Vec<usize>) {
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..30 {
            let e = (i % 7) as f64 * 0.05;
            rows.push(vec![e, 1.0 - e]);
            truth.push(0);
            rows.push(vec![20.0 + e, 20.0 - e]);
            truth.push(1);
        }
        (Matrix::from_rows(&rows), truth)
    }

    #[test]
    fn two_blobs_are_recovered() {
        let (x, truth) = blobs();
        let r = kmeans(&x, &KMeansParams::new(2), &derive_rng(1, &["km"])).unwrap();
        assert_eq!(adjusted_mutual_information(&truth, &r.labels).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster() {
        let (x, _) = blobs();
        let r = kmeans(&x, &KMeansParams::new(1), &derive_rng(1, &["km"])).unwrap();
        assert!(r.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn deterministic_and_monotone() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|i| vec![((i * 37) % 101) as f64, ((i * 53) % 89) as f64])
            .collect();
        let x = Matrix::from_rows(&rows);
        let rng = derive_rng(5, &["km"]);
        let a = kmeans(&x, &KMeansParams::new(6), &rng).unwrap();
        let b = kmeans(&x, &KMeansParams::new(6), &rng).unwrap();
        assert_eq!(a, b);
        assert!(a.history.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{:?}", a.history);
    }

    #[test]
    fn duplicate_points_force_empty_cluster_repair() {
        let x = Matrix::from_rows(&[vec![0.0], vec![0.0], vec![0.0], vec![1.0]]);
        let r = kmeans(&x, &KMeansParams::new(3), &derive_rng(2, &["km"])).unwrap();
        assert_eq!(r.labels.len(), 4);
        assert!(r.inertia.abs() < 1e-12);
    }

    #[test]
    fn k_too_large() {
        let x = Matrix::from_rows(&[vec![0.0]]);
        assert!(kmeans(&x, &KMeansParams::new(2), &derive_rng(1, &["km"])).is_err());
    }
}

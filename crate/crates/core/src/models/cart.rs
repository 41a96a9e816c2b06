//! Binary decision trees with axis-parallel splits (CART).

use crate::error::{Error, Result};
use crate::tabular::{Category, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: 8,
            min_leaf: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    /// Class index for classification, mean for regression.
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    classes: Vec<Category>,
    depth: usize,
}

enum Targets<'a> {
    Classes { ids: &'a [usize], n_classes: usize },
    Values(&'a [f64]),
}

impl Targets<'_> {
    /// Impurity of a node times its size: `n * gini` or the sum of squares.
    fn weighted_impurity(&self, rows: &[usize]) -> f64 {
        match self {
            Targets::Classes { ids, n_classes } => {
                let mut counts = vec![0usize; *n_classes];
                rows.iter().for_each(|&r| counts[ids[r]] += 1);
                gini_weighted(&counts, rows.len())
            }
            Targets::Values(y) => {
                let (s, s2) = rows.iter().fold((0.0, 0.0), |(s, s2), &r| (s + y[r], s2 + y[r] * y[r]));
                sse(s, s2, rows.len())
            }
        }
    }

    fn leaf_value(&self, rows: &[usize]) -> f64 {
        match self {
            Targets::Classes { ids, n_classes } => {
                let mut counts = vec![0usize; *n_classes];
                rows.iter().for_each(|&r| counts[ids[r]] += 1);
                // first maximum = smallest class among ties
                let mut best = 0;
                for (c, &n) in counts.iter().enumerate() {
                    if n > counts[best] {
                        best = c;
                    }
                }
                best as f64
            }
            Targets::Values(y) => rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64,
        }
    }
}

fn gini_weighted(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

fn sse(sum: f64, sum_sq: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        (sum_sq - sum * sum / n as f64).max(0.0)
    }
}

struct Builder<'a> {
    x: &'a Matrix,
    targets: Targets<'a>,
    params: CartParams,
    nodes: Vec<Node>,
    depth: usize,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn build(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(self.targets.leaf_value(rows)));
        self.depth = self.depth.max(depth);
        if depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf {
            return id;
        }
        let parent = self.targets.weighted_impurity(rows);
        if parent <= 1e-12 {
            return id;
        }
        let Some(best) = self.best_split(rows) else {
            return id;
        };
        if best.score >= parent - 1e-12 {
            return id;
        }
        let (feature, threshold) = (best.feature, best.threshold);
        rows.sort_by_key(|&r| self.x.get(r, feature) > threshold);
        let cut = rows.partition_point(|&r| self.x.get(r, feature) <= threshold);
        let (l, r) = rows.split_at_mut(cut);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for feature in 0..self.x.n_cols() {
            order.copy_from_slice(rows);
            order.sort_by(|&a, &b| {
                self.x
                    .get(a, feature)
                    .total_cmp(&self.x.get(b, feature))
                    .then(a.cmp(&b))
            });
            let value = |i: usize| self.x.get(order[i], feature);
            let mut consider = |i: usize, score: f64| {
                // split between positions i and i + 1
                if best.as_ref().is_none_or(|b| score < b.score - 1e-12) {
                    best = Some(BestSplit {
                        score,
                        feature,
                        threshold: 0.5 * (value(i) + value(i + 1)),
                    });
                }
            };
            match &self.targets {
                Targets::Classes { ids, n_classes } => {
                    let mut left = vec![0usize; *n_classes];
                    let mut right = vec![0usize; *n_classes];
                    order.iter().for_each(|&r| right[ids[r]] += 1);
                    for i in 0..n - 1 {
                        let c = ids[order[i]];
                        left[c] += 1;
                        right[c] -= 1;
                        let nl = i + 1;
                        if nl < min_leaf || n - nl < min_leaf || value(i) == value(i + 1) {
                            continue;
                        }
                        consider(i, gini_weighted(&left, nl) + gini_weighted(&right, n - nl));
                    }
                }
                Targets::Values(y) => {
                    let (ts, ts2) = order
                        .iter()
                        .fold((0.0, 0.0), |(s, s2), &r| (s + y[r], s2 + y[r] * y[r]));
                    let (mut ls, mut ls2) = (0.0, 0.0);
                    for i in 0..n - 1 {
                        let v = y[order[i]];
                        ls += v;
                        ls2 += v * v;
                        let nl = i + 1;
                        if nl < min_leaf || n - nl < min_leaf || value(i) == value(i + 1) {
                            continue;
                        }
                        consider(i, sse(ls, ls2, nl) + sse(ts - ls, ts2 - ls2, n - nl));
                    }
                }
            }
        }
        best
    }
}

impl DecisionTree {
    fn fit(x: &Matrix, targets: Targets<'_>, classes: Vec<Category>, params: CartParams) -> Result<Self> {
        if x.n_rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if params.min_leaf == 0 {
            return Err(Error::InvalidParameter("min_leaf must be at least 1".into()));
        }
        let mut builder = Builder {
            x,
            targets,
            params,
            nodes: Vec::new(),
            depth: 0,
        };
        let mut rows: Vec<usize> = (0..x.n_rows()).collect();
        builder.build(&mut rows, 0);
        Ok(DecisionTree {
            nodes: builder.nodes,
            classes,
            depth: builder.depth,
        })
    }

    /// Gini-minimising classification tree.
    pub fn fit_classifier(x: &Matrix, labels: &[Category], params: CartParams) -> Result<Self> {
        if x.n_rows() != labels.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: labels.len(),
            });
        }
        let mut classes = labels.to_vec();
        classes.sort();
        classes.dedup();
        let ids: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).unwrap()).collect();
        let n_classes = classes.len();
        Self::fit(x, Targets::Classes { ids: &ids, n_classes }, classes, params)
    }

    /// Variance-minimising regression tree.
    pub fn fit_regressor(x: &Matrix, y: &[f64], params: CartParams) -> Result<Self> {
        if x.n_rows() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.n_rows(),
                right: y.len(),
            });
        }
        Self::fit(x, Targets::Values(y), Vec::new(), params)
    }

    /// Depth of the deepest leaf; 0 for a single leaf.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn leaf_for(&self, row: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn predict_classes(&self, x: &Matrix) -> Result<Vec<Category>> {
        if self.classes.is_empty() {
            return Err(Error::InvalidParameter("tree was fitted for regression".into()));
        }
        Ok(x.rows_iter()
            .map(|r| self.classes[self.leaf_for(r) as usize].clone())
            .collect())
    }

    pub fn predict_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        if !self.classes.is_empty() {
            return Err(Error::InvalidParameter("tree was fitted for classification".into()));
        }
        Ok(x.rows_iter().map(|r| self.leaf_for(r)).collect())
    }
}

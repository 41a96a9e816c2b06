use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tabular::Category;

/// Always predicts the most frequent training class (ties to the smallest).
#[derive(Debug, Clone, PartialEq)]
pub struct MajorityClassifier {
    class: Category,
}

impl MajorityClassifier {
    pub fn fit(labels: &[Category]) -> Result<Self> {
        let counts = label_counts(labels)?;
        // max_by_key would keep the last of equal counts; ties go to the smallest class
        let mut best: Option<(&Category, usize)> = None;
        for (c, &n) in &counts {
            if best.is_none_or(|(_, b)| n > b) {
                best = Some((c, n));
            }
        }
        Ok(MajorityClassifier {
            class: best.expect("non-empty").0.clone(),
        })
    }

    pub fn class(&self) -> &Category {
        &self.class
    }

    pub fn predict(&self, n: usize) -> Vec<Category> {
        vec![self.class.clone(); n]
    }
}

/// Predicts labels at random in proportion to the training label frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRatioClassifier {
    classes: Vec<Category>,
    cumulative: Vec<usize>,
}

impl ClassRatioClassifier {
    pub fn fit(labels: &[Category]) -> Result<Self> {
        let counts = label_counts(labels)?;
        let mut total = 0;
        let mut classes = Vec::with_capacity(counts.len());
        let mut cumulative = Vec::with_capacity(counts.len());
        for (c, n) in counts {
            total += n;
            classes.push(c.clone());
            cumulative.push(total);
        }
        Ok(ClassRatioClassifier { classes, cumulative })
    }

    pub fn predict<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Category> {
        let total = *self.cumulative.last().expect("fitted on at least one label");
        (0..n)
            .map(|_| {
                let draw = rng.random_range(0..total);
                let idx = self.cumulative.partition_point(|&c| c <= draw);
                self.classes[idx].clone()
            })
            .collect()
    }
}

/// Always predicts the training mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanRegressor {
    mean: f64,
}

impl MeanRegressor {
    pub fn fit(y: &[f64]) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(MeanRegressor {
            mean: y.iter().sum::<f64>() / y.len() as f64,
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn predict(&self, n: usize) -> Vec<f64> {
        vec![self.mean; n]
    }
}

fn label_counts(labels: &[Category]) -> Result<BTreeMap<&Category, usize>> {
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut counts = BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0) += 1;
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::metrics::r2;
    use crate::tabular::derive_rng;

    fn labels(spec: &[(&str, usize)]) -> Vec<Category> {
        spec.iter()
            .flat_map(|(c, n)| std::iter::repeat_n(Category::from(*c), *n))
            .collect()
    }

    #[test]
    fn majority() {
        let m = MajorityClassifier::fit(&labels(&[("B", 3), ("A", 7)])).unwrap();
        assert_eq!(m.predict(2), vec![Category::from("A"); 2]);
        let tie = MajorityClassifier::fit(&labels(&[("B", 3), ("A", 3)])).unwrap();
        assert_eq!(tie.class(), &Category::from("A"));
        assert!(MajorityClassifier::fit(&[]).is_err());
    }

    #[test]
    fn single_class_training() {
        let y = labels(&[("z", 4)]);
        let mut rng = derive_rng(1, &["ratio"]);
        assert!(ClassRatioClassifier::fit(&y)
            .unwrap()
            .predict(50, &mut rng)
            .iter()
            .all(|c| c == &y[0]));
        assert_eq!(MajorityClassifier::fit(&y).unwrap().predict(1), vec![y[0].clone()]);
    }

    #[test]
    fn class_ratio_frequencies_within_three_sigma() {
        let clf = ClassRatioClassifier::fit(&labels(&[("A", 7), ("B", 2), ("C", 1)])).unwrap();
        let n = 10_000;
        let preds = clf.predict(n, &mut derive_rng(7, &["ratio"]));
        for (class, p) in [("A", 0.7), ("B", 0.2), ("C", 0.1)] {
            let hits = preds.iter().filter(|c| **c == Category::from(class)).count() as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((hits - n as f64 * p).abs() <= 3.0 * sigma, "{class}: {hits}");
        }
    }

    #[test]
    fn mean_regressor() {
        let y = [1.0, 2.0, 6.0];
        let m = MeanRegressor::fit(&y).unwrap();
        assert_eq!(m.predict(2), vec![3.0, 3.0]);
        assert_eq!(r2(&y, &m.predict(3)).unwrap(), 0.0);
        assert!(MeanRegressor::fit(&[]).is_err());
    }
}

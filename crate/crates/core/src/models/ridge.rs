use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tabular::Matrix;

/// Linear model fitted in closed form with an L2 penalty on the slopes. The
/// intercept is recovered from the centred fit and is not penalised.
#[derive(Debug, Clone, PartialEq)]
pub struct Ridge {
    coef: Vec<f64>,
    intercept: f64,
}

/// Relative singular-value floor below which the unpenalised system is
/// treated as rank deficient.
const RANK_TOLERANCE: f64 = 1e-10;

impl Ridge {
    pub fn fit(x: &Matrix, y: &[f64], alpha: f64) -> Result<Self> {
        let (n, d) = (x.n_rows(), x.n_cols());
        if n != y.len() {
            return Err(Error::LengthMismatch {
                left: n,
                right: y.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ridge alpha must be non-negative, got {alpha}"
            )));
        }
        let x_mean: Vec<f64> = (0..d)
            .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
            .collect();
        let y_mean = y.iter().sum::<f64>() / n as f64;
        if d == 0 {
            return Ok(Ridge {
                coef: Vec::new(),
                intercept: y_mean,
            });
        }
        let xc = DMatrix::from_fn(n, d, |i, j| x.get(i, j) - x_mean[j]);
        let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
        let mut gram = xc.tr_mul(&xc);
        for j in 0..d {
            gram[(j, j)] += alpha;
        }
        let rhs = xc.tr_mul(&yc);

        let beta = if alpha > 0.0 {
            gram.cholesky()
                .ok_or_else(|| Error::Singular("penalised normal equations are not positive definite".into()))?
                .solve(&rhs)
        } else {
            let svd = gram.svd(true, true);
            let max = svd.singular_values.max();
            let min = svd.singular_values.min();
            if max == 0.0 || min / max < RANK_TOLERANCE {
                return Err(Error::Singular(
                    "features are collinear; use alpha > 0 for a penalised fit".into(),
                ));
            }
            svd.solve(&rhs, 0.0).map_err(|e| Error::Singular(e.to_string()))?
        };
        let coef: Vec<f64> = beta.iter().copied().collect();
        let intercept = y_mean - coef.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
        Ok(Ridge { coef, intercept })
    }

    pub fn coef(&self) -> &[f64] {
        &self.coef
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.n_cols() != self.coef.len() {
            return Err(Error::LengthMismatch {
                left: x.n_cols(),
                right: self.coef.len(),
            });
        }
        Ok(x.rows_iter()
            .map(|r| self.intercept + r.iter().zip(&self.coef).map(|(v, b)| v * b).sum::<f64>())
            .collect())
    }
}

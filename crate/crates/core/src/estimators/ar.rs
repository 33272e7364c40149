use nalgebra::{DMatrix, DVector};

use super::series::incremental_mean;
use crate::error::{Error, Result};

pub const DEFAULT_FIT_WINDOW: usize = 200;

/// Relative singular-value cutoff on the normal matrix below which a fit is
/// treated as singular.
const RANK_TOLERANCE: f64 = 1e-12;

/// Autoregressive model `x_t = c + sum_i phi_i * x_{t-i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    intercept: f64,
    coefficients: Vec<f64>,
}

/// Result of [`ArModel::fit`]. `degenerate` is set when the normal equations
/// were singular and the model fell back to the window mean.
#[derive(Debug, Clone, PartialEq)]
pub struct ArFit {
    pub model: ArModel,
    pub degenerate: bool,
}

impl ArModel {
    pub fn new(intercept: f64, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Config("AR order must be at least 1".into()));
        }
        if !intercept.is_finite() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::RejectedInput("non-finite AR parameter".into()));
        }
        Ok(ArModel {
            intercept,
            coefficients,
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    /// `phi_1 .. phi_p`; `phi_1` multiplies the most recent sample.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Ordinary least squares over the most recent `fit_window` values.
    pub fn fit(values: &[f64], order: usize, fit_window: usize) -> Result<ArFit> {
        if order == 0 {
            return Err(Error::Config("AR order must be at least 1".into()));
        }
        let window = &values[values.len().saturating_sub(fit_window)..];
        if window.len() < order + 2 {
            return Err(Error::Fit(format!(
                "AR({order}) needs {} samples in the fit window, have {}",
                order + 2,
                window.len()
            )));
        }

        let dim = order + 1;
        let mut normal = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        let mut row = vec![0.0; dim];
        for t in order..window.len() {
            row[0] = 1.0;
            for i in 1..=order {
                row[i] = window[t - i];
            }
            let y = window[t];
            for a in 0..dim {
                rhs[a] += row[a] * y;
                for b in a..dim {
                    normal[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..dim {
            for b in 0..a {
                normal[(a, b)] = normal[(b, a)];
            }
        }

        let svd = normal.svd(true, true);
        let max_sv = svd.singular_values.max();
        let min_sv = svd.singular_values.min();
        let singular = !(max_sv > 0.0) || min_sv <= max_sv * RANK_TOLERANCE;
        if !singular {
            if let Ok(beta) = svd.solve(&rhs, 0.0) {
                if beta.iter().all(|b| b.is_finite()) {
                    return Ok(ArFit {
                        model: ArModel {
                            intercept: beta[0],
                            coefficients: beta.iter().skip(1).copied().collect(),
                        },
                        degenerate: false,
                    });
                }
            }
        }

        let mean = incremental_mean(window.iter().copied()).expect("window is non-empty");
        Ok(ArFit {
            model: ArModel {
                intercept: mean,
                coefficients: vec![0.0; order],
            },
            degenerate: true,
        })
    }

    /// One-step prediction from the `order` most recent values.
    pub fn predict(&self, values: &[f64]) -> Result<f64> {
        let p = self.order();
        if values.len() < p {
            return Err(Error::Prediction(format!(
                "AR({p}) needs {p} samples, have {}",
                values.len()
            )));
        }
        let n = values.len();
        let mut y = self.intercept;
        for (i, phi) in self.coefficients.iter().enumerate() {
            y += phi * values[n - 1 - i];
        }
        Ok(y)
    }
}

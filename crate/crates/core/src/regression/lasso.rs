//! Lasso by cyclic coordinate descent with soft-thresholding.

use super::{Dataset, Predictor, RegressionError, TrainConfig};

/// Largest violation of the subgradient optimality conditions accepted.
const TOLERANCE: f64 = 1e-10;
const MAX_SWEEPS: usize = 100_000;

/// `η(x) = Σ_j w_j x[selected_j] + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub selected: Vec<usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn new(selected: Vec<usize>, weights: Vec<f64>, bias: f64) -> Result<Self, RegressionError> {
        if selected.len() != weights.len() {
            return Err(RegressionError::Dimension {
                expected: selected.len(),
                got: weights.len(),
            });
        }
        Ok(Self {
            selected,
            weights,
            bias,
        })
    }
}

impl Predictor for LinearModel {
    fn predict(&self, x: &[f64]) -> Result<f64, RegressionError> {
        let mut y = self.bias;
        for (&j, w) in self.selected.iter().zip(&self.weights) {
            y += w * x.get(j).ok_or(RegressionError::Dimension {
                expected: j + 1,
                got: x.len(),
            })?;
        }
        Ok(y)
    }
}

/// Distance of `0` from the subdifferential, maximized over coordinates.
fn optimality_gap(x: &[Vec<f64>], residual: &[f64], w: &[f64], lambda: f64) -> f64 {
    let nf = x.len() as f64;
    let mut gap = (residual.iter().sum::<f64>() / nf).abs();
    for (j, &wj) in w.iter().enumerate() {
        let g = x.iter().zip(residual).map(|(r, res)| r[j] * res).sum::<f64>() / nf;
        let v = if wj == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g - lambda * wj.signum()).abs()
        };
        gap = gap.max(v);
    }
    gap
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// `(1/2n) Σ (y - b - x·w)² + λ ‖w‖₁` for full-width weights.
pub fn lasso_objective(data: &Dataset, weights: &[f64], bias: f64, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let sq: f64 = data
        .x()
        .iter()
        .zip(data.y())
        .map(|(x, y)| {
            let p: f64 = bias + x.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>();
            (y - p).powi(2)
        })
        .sum();
    sq / (2.0 * n) + lambda * weights.iter().map(|w| w.abs()).sum::<f64>()
}

/// Fits on all columns of `data`; columns with zero weight are left out of
/// the returned model's selection.
pub fn train_lasso(data: &Dataset, cfg: &TrainConfig) -> Result<LinearModel, RegressionError> {
    cfg.validate()?;
    let n = data.len();
    let k = data.width();
    let nf = n as f64;
    let x = data.x();
    let y = data.y();
    let col_sq: Vec<f64> = (0..k)
        .map(|j| x.iter().map(|r| r[j] * r[j]).sum::<f64>() / nf)
        .collect();
    let mut w = vec![0.0; k];
    let mut bias = y.iter().sum::<f64>() / nf;
    let mut residual: Vec<f64> = y.iter().map(|v| v - bias).collect();

    for sweep in 0..MAX_SWEEPS {
        let mut max_change: f64 = 0.0;
        let shift = residual.iter().sum::<f64>() / nf;
        if shift != 0.0 {
            bias += shift;
            residual.iter_mut().for_each(|r| *r -= shift);
            max_change = max_change.max(shift.abs());
        }
        for j in 0..k {
            if col_sq[j] == 0.0 {
                continue;
            }
            let rho: f64 = x
                .iter()
                .zip(&residual)
                .map(|(r, res)| r[j] * (res + r[j] * w[j]))
                .sum::<f64>()
                / nf;
            let new = soft_threshold(rho, cfg.lambda) / col_sq[j];
            let delta = new - w[j];
            if delta != 0.0 {
                for (r, res) in x.iter().zip(residual.iter_mut()) {
                    *res -= r[j] * delta;
                }
                w[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change == 0.0 || optimality_gap(x, &residual, &w, cfg.lambda) < TOLERANCE {
            log::debug!("lasso converged after {} sweeps", sweep + 1);
            break;
        }
    }

    let selected: Vec<usize> = (0..k).filter(|&j| w[j] != 0.0).collect();
    let weights = selected.iter().map(|&j| w[j]).collect();
    LinearModel::new(selected, weights, bias)
}

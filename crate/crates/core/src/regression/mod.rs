//! Prediction functions: Lasso linear regression and ReLU networks, their
//! training, R² evaluation and repeated k-fold cross-validation.

mod cv;
mod io;
mod lasso;
mod mlp;

pub use cv::{cross_validate, derive_seed, median, CvReport};
pub use io::{ModelFile, PredictionModel};
pub use lasso::{lasso_objective, train_lasso, LinearModel};
pub use mlp::{train_mlp, Gradients, Layer, MlpModel, TrainingSummary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("empty dataset")]
    Empty,
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("all target values are equal; the coefficient of determination is undefined")]
    ConstantTarget,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dataset of {rows} rows cannot be split into {folds} folds")]
    TooFewRows { rows: usize, folds: usize },
    #[error("model file line {line}: {message}")]
    ModelFile { line: usize, message: String },
}

/// Feature rows with one target value each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, RegressionError> {
        if x.is_empty() {
            return Err(RegressionError::Empty);
        }
        if x.len() != y.len() {
            return Err(RegressionError::Dimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        let width = x[0].len();
        for row in &x {
            if row.len() != width {
                return Err(RegressionError::Dimension {
                    expected: width,
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(RegressionError::NonFinite("features"));
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(RegressionError::NonFinite("targets"));
        }
        Ok(Self { x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn width(&self) -> usize {
        self.x[0].len()
    }

    pub fn x(&self) -> &[Vec<f64>] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            x: rows.iter().map(|&i| self.x[i].clone()).collect(),
            y: rows.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Keeps only the given feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Self {
            x: self
                .x
                .iter()
                .map(|r| columns.iter().map(|&j| r[j]).collect())
                .collect(),
            y: self.y.clone(),
        }
    }
}

/// Anything that maps a full-width feature vector to a value.
pub trait Predictor {
    fn predict(&self, x: &[f64]) -> Result<f64, RegressionError>;
}

/// `1 - Σ(a - ŷ)² / Σ(a - ā)²`.
pub fn r_squared_values(observed: &[f64], predicted: &[f64]) -> Result<f64, RegressionError> {
    if observed.is_empty() {
        return Err(RegressionError::Empty);
    }
    if observed.len() != predicted.len() {
        return Err(RegressionError::Dimension {
            expected: observed.len(),
            got: predicted.len(),
        });
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let total: f64 = observed.iter().map(|a| (a - mean).powi(2)).sum();
    if total == 0.0 {
        return Err(RegressionError::ConstantTarget);
    }
    let err: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum();
    Ok(1.0 - err / total)
}

pub fn r_squared(model: &dyn Predictor, data: &Dataset) -> Result<f64, RegressionError> {
    let predicted = data
        .x()
        .iter()
        .map(|x| model.predict(x))
        .collect::<Result<Vec<_>, _>>()?;
    r_squared_values(data.y(), &predicted)
}

/// Training hyperparameters shared by both learners.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Stop once train R² exceeds this value.
    pub r_stop: f64,
    /// Nominal epoch budget; training always halts after ⌈1.5·it_stop⌉ epochs.
    pub it_stop: u32,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    /// Lasso penalty λ.
    pub lambda: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            r_stop: 0.99,
            it_stop: 2000,
            learning_rate: 0.05,
            batch_size: 8,
            seed: 0,
            lambda: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RegressionError> {
        if !(0.0..=1.0).contains(&self.r_stop) {
            return Err(RegressionError::Config(format!(
                "r_stop must lie in [0,1], got {}",
                self.r_stop
            )));
        }
        if self.it_stop < 1 {
            return Err(RegressionError::Config("it_stop must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RegressionError::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(RegressionError::Config("batch size must be at least 1".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(RegressionError::Config(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// ⌈1.5 · it_stop⌉.
    pub fn epoch_cap(&self) -> u32 {
        (3 * self.it_stop).div_ceil(2)
    }
}

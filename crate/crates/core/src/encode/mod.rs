//! Compilation of trained predictors (C1) and of graph construction with
//! descriptor consistency (C2) into MILP fragments, plus the target binding
//! that joins them.

mod graph;
mod inverse;
mod predictor;
mod spec;

pub use graph::{encode_graph, GraphEncoding};
pub use inverse::{build_inverse, InverseInstance};
pub use predictor::{encode_linear, encode_mlp, encode_predictor, HiddenUnit, MlpEncoding};
pub use spec::{CountBounds, TopologySpec};

use thiserror::Error;

use crate::chemgraph::GraphError;
use crate::descriptors::DescriptorError;
use crate::milp::{MilpError, MilpModel, Sense, VarId};

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Descriptor(#[from] DescriptorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected {expected} input variables, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("variable `{0}` needs finite bounds")]
    Unbounded(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("target interval [{lower}, {upper}] is empty or not finite")]
    BadInterval { lower: f64, upper: f64 },
    #[error("topology spec line {line}: {message}")]
    Spec { line: usize, message: String },
    #[error("inconsistent topology spec: {0}")]
    Inconsistent(String),
    #[error("cannot decode assignment: {0}")]
    Decode(String),
}

/// `[y_lower, y_upper]`, both finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetInterval {
    pub y_lower: f64,
    pub y_upper: f64,
}

impl TargetInterval {
    pub fn new(y_lower: f64, y_upper: f64) -> Result<Self, EncodeError> {
        if !(y_lower.is_finite() && y_upper.is_finite() && y_lower <= y_upper) {
            return Err(EncodeError::BadInterval {
                lower: y_lower,
                upper: y_upper,
            });
        }
        Ok(Self { y_lower, y_upper })
    }

    pub fn contains(&self, y: f64, tolerance: f64) -> bool {
        y >= self.y_lower - tolerance && y <= self.y_upper + tolerance
    }
}

/// Adds `y >= y_lower` and `y <= y_upper` as `{name}.lo` / `{name}.hi`.
pub fn bind_target(
    m: &mut MilpModel,
    name: &str,
    y: VarId,
    t: &TargetInterval,
) -> Result<(), EncodeError> {
    let t = TargetInterval::new(t.y_lower, t.y_upper)?;
    m.add_constraint(&format!("{name}.lo"), y, Sense::Ge, t.y_lower)?;
    m.add_constraint(&format!("{name}.hi"), y, Sense::Le, t.y_upper)?;
    Ok(())
}

fn finite_bounds(m: &MilpModel, v: VarId) -> Result<(f64, f64), EncodeError> {
    let var = m.variable(v);
    if var.lower.is_finite() && var.upper.is_finite() {
        Ok((var.lower, var.upper))
    } else {
        Err(EncodeError::Unbounded(var.name.clone()))
    }
}

//! Mixed-integer linear programs: a small modelling layer, LP-file
//! output and external solver calls with independent re-verification.

mod lp;
mod model;
mod solve;

pub use lp::{format_number, read_lp, write_lp};
pub use model::{
    is_valid_name, Constraint, LinExpr, MilpModel, Objective, Sense, VarId, VarKind, Variable,
};
pub use solve::{
    finish, parse_cbc, parse_highs, MilpSolver, ParsedSolution, SolutionFormat, SolveResult,
    SolveStatus, SolverConfig, FEASIBILITY_TOLERANCE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("`{0}` is not a valid LP name")]
    InvalidName(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("invalid bounds [{lower}, {upper}] for `{name}`")]
    InvalidBounds { name: String, lower: f64, upper: f64 },
    #[error("non-finite coefficient or right-hand side in `{0}`")]
    NonFinite(String),
    #[error("model has no variables")]
    EmptyModel,
    #[error("LP line {line}: {message}")]
    LpSyntax { line: usize, message: String },
    #[error("solver not found: {0}")]
    SolverNotFound(String),
    #[error("unparsable solver output: {0}")]
    SolutionParse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

use thiserror::Error;

use crate::dirichlet::SolveReport;
use crate::path::DiscretePath;

/// Errors raised while parsing or evaluating an [`Expression`](crate::expr::Expression).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("function `{name}` expects {expected} argument(s), got {found} (byte {offset})")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },

    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("domain error in `{0}`")]
    Domain(String),
}

impl ExprError {
    /// Byte offset into the source text, for parse-time errors.
    pub fn offset(&self) -> Option<usize> {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::Arity { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

/// Which level of a nested shooting sweep failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepLevel {
    Single,
    Inner,
    Outer,
}

impl std::fmt::Display for SweepLevel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SweepLevel::Single => "single",
            SweepLevel::Inner => "inner",
            SweepLevel::Outer => "outer",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("non-finite argument {0} passed to Phi")]
    PhiDomain(f64),

    #[error("Phi does not appear surjective: no bracket for value {value} within 2^64")]
    NonSurjective { value: f64 },

    #[error("Phi is not strictly increasing: Phi({y1}) = {v1} >= Phi({y2}) = {v2}")]
    NotMonotone { y1: f64, y2: f64, v1: f64, v2: f64 },

    #[error("mesh needs at least {min} cells, got {n}")]
    MeshTooSmall { n: usize, min: usize },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("singular point {point} lies outside [0, {t_end}]")]
    SingularPointOutside { point: f64, t_end: f64 },

    #[error("non-finite integrand value {value} in cell {cell}")]
    NonFiniteIntegrand { cell: usize, value: f64 },

    #[error("cell function has {found} values, mesh has {expected} cells")]
    LengthMismatch { expected: usize, found: usize },

    #[error("coefficient is not positive at cell {cell} (a = {value})")]
    NonPositiveCoefficient { cell: usize, value: f64 },

    #[error("failed to bracket root: {0}")]
    Bracket(String),

    #[error("operation requires a {expected} boundary specification")]
    WrongBoundaryKind { expected: &'static str },

    #[error("fixed-point iteration did not converge after {iterations} iterations (distance {distance:e})")]
    NonConvergence {
        iterations: usize,
        distance: f64,
        best: Box<(DiscretePath, SolveReport)>,
    },

    #[error("inner solve failed at nu = {nu}: {source}")]
    InnerSolve {
        nu: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("no sign change of the boundary score on the {level} nu-grid")]
    NoSignChange {
        level: SweepLevel,
        profile: Vec<(f64, f64)>,
    },

    #[error("shooting bisection stalled at nu = {nu} with score {score:e}")]
    ShootingStalled { nu: f64, score: f64 },

    #[error("hypothesis {hypothesis} not satisfied: {detail}")]
    Precondition {
        hypothesis: &'static str,
        detail: String,
    },

    #[error("flux bound search exceeded L = {limit:e} (RHS {rhs}, best integral {best})")]
    DivergenceTooSlow { limit: f64, rhs: f64, best: f64 },

    #[error("missing problem data: {0}")]
    Missing(&'static str),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

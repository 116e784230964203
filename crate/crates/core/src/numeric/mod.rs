//! Numeric certification of closed-form solutions.

pub mod elliptic;
mod residual;
mod solutions;

use thiserror::Error;

use crate::expr::ExprError;
use crate::parser::ParseError;

pub use elliptic::{jacobi, jacobi_sn, ModulusError};
pub use residual::{derivative_agreement, evaluate_residual, residual_sample, Axis, ResidualReport, SolutionAnsatz};
pub use solutions::{
    check_case, check_quadrature, check_sn_solution, parse_solutions, sn_ansatz, CaseReport, QuadratureSolution,
    SolutionCase,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("only {accepted} of {wanted} samples avoided singularities")]
    TooManyRejected { accepted: usize, wanted: usize },
}

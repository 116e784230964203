//! Point symmetries of nonlocal systems: prolongation over reflected jets,
//! the linearized symmetry condition, and classification by polynomial
//! ansatz.
//!
//! The prolongation acting on a system with reflections follows the
//! reflected formula: the base part `ξⁱ ∂/∂xⁱ` differentiates explicit
//! coordinates only, every local jet `u_J` receives `φ_J`, and each
//! transformed jet `T(u_J)` (reflected and/or conjugated) receives
//! `T(φ_J)`.

mod algebra;
mod classify;
mod condition;
mod prolong;
mod realify;

use thiserror::Error;

use crate::expr::{Bindings, Expr, ExprError};
use crate::scope::Scope;

pub use algebra::{apply_field, evolutionary_residual, lie_bracket, to_evolutionary};
pub use classify::{
    build_ansatz, classify_ansatz, extract_determining, Ansatz, Classification, ClassifyOptions, DeterminingSystem,
};
pub use condition::{apply_linearized_condition, reduce_on_solutions, verify_symmetry, Verdict};
pub use prolong::{prolong, prolong_reflected, ProlongedGenerator};
pub use realify::realify;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("the system declares no leading derivatives")]
    NoLeading,
    #[error("on-solution substitution did not terminate within {0} passes")]
    NonTerminating(usize),
    #[error("reflection on axis {axis} but only {dim} independent variables")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("residual is not polynomial in the unknowns: {0}")]
    NotPolynomial(String),
    #[error("prolongation order must be at least 1")]
    ZeroOrder,
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = SymmetryError> = std::result::Result<T, E>;

/// `v = ξⁱ(x,u) ∂/∂xⁱ + φ^α(x,u) ∂/∂u^α`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: Option<String>,
    pub xi: Vec<Expr>,
    pub phi: Vec<Expr>,
}

impl Generator {
    pub fn zero(dim: usize, deps: usize) -> Self {
        Generator { name: None, xi: vec![Expr::zero(); dim], phi: vec![Expr::zero(); deps] }
    }

    pub fn new(xi: Vec<Expr>, phi: Vec<Expr>) -> Self {
        Generator { name: None, xi, phi }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn is_zero(&self) -> bool {
        self.components().all(|c| c.is_zero())
    }

    pub fn components(&self) -> impl Iterator<Item = &Expr> {
        self.xi.iter().chain(self.phi.iter())
    }

    fn zip_with(&self, o: &Generator, f: impl Fn(&Expr, &Expr) -> Expr) -> Generator {
        Generator {
            name: None,
            xi: self.xi.iter().zip(&o.xi).map(|(a, b)| f(a, b)).collect(),
            phi: self.phi.iter().zip(&o.phi).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Generator) -> Generator {
        self.zip_with(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Generator) -> Generator {
        self.zip_with(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &Expr) -> Generator {
        Generator {
            name: None,
            xi: self.xi.iter().map(|a| a.mul(c)).collect(),
            phi: self.phi.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn substitute(&self, b: &Bindings) -> Result<Generator> {
        Ok(Generator {
            name: self.name.clone(),
            xi: self.xi.iter().map(|e| e.substitute(b)).collect::<Result<_, _>>()?,
            phi: self.phi.iter().map(|e| e.substitute(b)).collect::<Result<_, _>>()?,
        })
    }

    /// `gen name { xi_x: ...; phi_q: ...; }`
    pub fn to_text(&self, scope: &Scope) -> String {
        let mut s = String::from("gen ");
        if let Some(n) = &self.name {
            s.push_str(n);
            s.push(' ');
        }
        s.push('{');
        for (i, e) in self.xi.iter().enumerate() {
            s.push_str(&format!(" xi_{}: {};", scope.vars[i], e.display(scope)));
        }
        for (a, e) in self.phi.iter().enumerate() {
            s.push_str(&format!(" phi_{}: {};", scope.deps[a], e.display(scope)));
        }
        s.push_str(" }");
        s
    }
}

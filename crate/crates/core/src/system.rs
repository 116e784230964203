//! Systems of (possibly nonlocal) differential equations.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::expr::{Atom, Expr, ExprError, Jet};
use crate::scope::Scope;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemError {
    #[error("the system has no equations")]
    Empty,
    #[error("no equation named `{0}`")]
    UnknownEquation(String),
    #[error("`{jet}` does not occur in equation `{equation}`")]
    LeadingAbsent { jet: String, equation: String },
    #[error("`{jet}` occurs nonlinearly in equation `{equation}`")]
    LeadingNonlinear { jet: String, equation: String },
    #[error("leading derivative must be a local jet of order at least one, got `{0}`")]
    BadLeading(String),
    #[error("reflection on axis {axis} but only {dim} independent variables")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub name: String,
    /// Left-hand side of `expr = 0`.
    pub expr: Expr,
}

/// A declared leading derivative: on solutions `jet = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Leading {
    pub jet: Jet,
    pub equation: usize,
    pub rhs: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationSystem {
    pub scope: Scope,
    pub equations: Vec<Equation>,
    pub leading: Vec<Leading>,
}

impl EquationSystem {
    pub fn new(scope: Scope, equations: Vec<Equation>) -> Result<Self, SystemError> {
        if equations.is_empty() {
            return Err(SystemError::Empty);
        }
        let sys = EquationSystem { scope, equations, leading: Vec::new() };
        sys.check_axes()?;
        Ok(sys)
    }

    fn check_axes(&self) -> Result<(), SystemError> {
        let dim = self.scope.dim();
        for e in &self.equations {
            for j in e.expr.jets() {
                if j.mask >> dim != 0 {
                    let axis = 31 - j.mask.leading_zeros() as usize;
                    return Err(SystemError::AxisOutOfRange { axis, dim });
                }
                if j.orders.len() != dim {
                    return Err(SystemError::AxisOutOfRange { axis: j.orders.len().saturating_sub(1), dim });
                }
            }
        }
        Ok(())
    }

    pub fn equation_index(&self, name: &str) -> Option<usize> {
        self.equations.iter().position(|e| e.name == name)
    }

    /// Declares `jet` as the leading derivative of equation `name`, solving
    /// the equation for it. The jet must occur linearly.
    pub fn solve_for(&mut self, jet: Jet, name: &str) -> Result<(), SystemError> {
        let idx = self.equation_index(name).ok_or_else(|| SystemError::UnknownEquation(name.into()))?;
        let label = crate::expr::print::print_jet(&jet, &self.scope);
        if !jet.is_local() || jet.order() == 0 {
            return Err(SystemError::BadLeading(label));
        }
        let f = &self.equations[idx].expr;
        let atom = Atom::Jet(jet.clone());
        let coeff = f.partial(&atom)?;
        if coeff.is_zero() {
            return Err(SystemError::LeadingAbsent { jet: label, equation: name.into() });
        }
        if coeff.jets().contains(&jet) {
            return Err(SystemError::LeadingNonlinear { jet: label, equation: name.into() });
        }
        let rest = f.sub(&coeff.mul(&Expr::jet(jet.clone())));
        if rest.jets().contains(&jet) {
            return Err(SystemError::LeadingNonlinear { jet: label, equation: name.into() });
        }
        let rhs = rest.neg().div(&coeff)?;
        self.leading.push(Leading { jet, equation: idx, rhs });
        Ok(())
    }

    pub fn all_jets(&self) -> BTreeSet<Jet> {
        self.equations.iter().flat_map(|e| e.expr.jets()).collect()
    }

    /// Complex when declared so, or when conjugation or a non-real constant
    /// occurs.
    pub fn is_complex(&self) -> bool {
        self.scope.complex
            || self.equations.iter().any(|e| {
                e.expr.jets().iter().any(|j| j.conj) || e.expr.terms().any(|(_, c)| !c.is_real())
            })
    }

    /// The group generated by the reflection masks occurring in the system.
    pub fn reflection_masks(&self) -> Vec<u32> {
        let mut group: BTreeSet<u32> = BTreeSet::from([0]);
        for j in self.all_jets() {
            if j.mask != 0 {
                let current: Vec<u32> = group.iter().copied().collect();
                for g in current {
                    group.insert(g ^ j.mask);
                }
            }
        }
        group.into_iter().collect()
    }

    /// Every (mask, conjugation) pair under which the equations also hold.
    pub fn transforms(&self) -> Vec<(u32, bool)> {
        let conj: &[bool] = if self.is_complex() { &[false, true] } else { &[false] };
        self.reflection_masks()
            .into_iter()
            .flat_map(|m| conj.iter().map(move |&c| (m, c)))
            .collect()
    }

    pub fn max_order(&self) -> u32 {
        self.all_jets().iter().map(|j| j.order()).max().unwrap_or(0)
    }

    pub fn has_reflections(&self) -> bool {
        self.all_jets().iter().any(|j| j.mask != 0)
    }

    /// Printed in the input language.
    pub fn to_text(&self) -> String {
        let mut s = self.scope.header();
        for e in &self.equations {
            s.push_str(&format!("eq {}: {} = 0;\n", e.name, e.expr.display(&self.scope)));
        }
        for l in &self.leading {
            let jet = crate::expr::print::print_jet(&l.jet, &self.scope);
            s.push_str(&format!("solve {} from {};\n", jet, self.equations[l.equation].name));
        }
        s
    }
}

/// Applies a reflection mask and conjugation to an expression.
pub fn apply_transform(e: &Expr, mask: u32, conj: bool) -> Expr {
    let e = if mask != 0 { e.reflect(mask) } else { e.clone() };
    if conj {
        e.conjugate()
    } else {
        e
    }
}

use rayon::prelude::*;

use crate::expr::{Atom, BindingKey, Bindings, Expr, Jet};
use crate::system::EquationSystem;

use super::prolong::prolong_reflected;
use super::{Generator, Result, SymmetryError};

const MAX_PASSES: usize = 64;

/// `pr v (F_k)` for each equation, before restriction to solutions.
pub fn apply_linearized_condition(sys: &EquationSystem, g: &Generator) -> Result<Vec<Expr>> {
    let order = sys.max_order().max(1);
    let pr = prolong_reflected(g, sys, order)?;
    sys.equations
        .par_iter()
        .map(|eq| {
            let f = &eq.expr;
            let mut acc = Vec::new();
            for (i, xi) in g.xi.iter().enumerate() {
                if xi.is_zero() || !f.contains_var(i) {
                    continue;
                }
                acc.push(xi.mul(&f.partial(&Atom::Var(i))?));
            }
            for j in f.jets() {
                let c = pr.coefficient(&j).expect("prolongation covers the system order");
                if c.is_zero() {
                    continue;
                }
                acc.push(c.mul(&f.partial(&Atom::Jet(j))?));
            }
            Ok(acc.into_iter().sum())
        })
        .collect()
}

fn dominates(j: &Jet, lead: &Jet) -> Option<Vec<u32>> {
    if j.dep != lead.dep || j.orders.len() != lead.orders.len() {
        return None;
    }
    j.orders.iter().zip(&lead.orders).map(|(a, b)| a.checked_sub(*b)).collect()
}

/// Eliminates every declared leading derivative, in every transformed
/// family, together with all its derivatives.
pub fn reduce_on_solutions(residual: &Expr, sys: &EquationSystem) -> Result<Expr> {
    if sys.leading.is_empty() {
        return Err(SymmetryError::NoLeading);
    }
    let mut e = residual.clone();
    let mut derived: std::collections::HashMap<(usize, Vec<u32>), Expr> = Default::default();
    for _ in 0..MAX_PASSES {
        let mut b = Bindings::new();
        let mut any = false;
        for j in e.jets() {
            for (idx, lead) in sys.leading.iter().enumerate() {
                let Some(extra) = dominates(&j, &lead.jet) else { continue };
                let local = match derived.get(&(idx, extra.clone())) {
                    Some(v) => v.clone(),
                    None => {
                        let v = lead.rhs.total_derivative_multi(&extra)?;
                        derived.insert((idx, extra.clone()), v.clone());
                        v
                    }
                };
                b.bind(BindingKey::Jet(j.clone()), local.to_family_of(&j));
                any = true;
                break;
            }
        }
        if !any {
            return Ok(e);
        }
        e = e.substitute(&b)?;
    }
    Err(SymmetryError::NonTerminating(MAX_PASSES))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub is_symmetry: bool,
    pub residuals: Vec<Expr>,
}

pub fn verify_symmetry(sys: &EquationSystem, g: &Generator) -> Result<Verdict> {
    let raw = apply_linearized_condition(sys, g)?;
    let residuals = raw.iter().map(|r| reduce_on_solutions(r, sys)).collect::<Result<Vec<_>>>()?;
    Ok(Verdict { is_symmetry: residuals.iter().all(|r| r.is_zero()), residuals })
}

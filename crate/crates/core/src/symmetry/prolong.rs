use std::collections::BTreeMap;

use crate::expr::{Expr, Jet};
use crate::system::EquationSystem;

use super::{Generator, Result, SymmetryError};

/// Prolongation coefficients `φ_J^α` for `|J| ≤ order`, plus transformed
/// copies `T(φ_J)` for the nonlocal jet families of a system.
#[derive(Clone, Debug)]
pub struct ProlongedGenerator {
    pub base: Generator,
    pub order: u32,
    pub local: BTreeMap<Jet, Expr>,
    pub transformed: BTreeMap<Jet, Expr>,
}

/// Multi-indices of total order `k` in `dim` variables, in lexicographic
/// order.
pub(crate) fn multi_indices(dim: usize, k: u32) -> Vec<Vec<u32>> {
    if dim == 0 {
        return if k == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in multi_indices(dim - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `φ_{J+1_i} = D_i φ_J − Σ_j (D_i ξʲ) u_{J+1_j}`.
pub(crate) fn next_coefficient(g: &Generator, dep: usize, parent: &Jet, phi_j: &Expr, i: usize) -> Result<Expr> {
    let mut out = phi_j.total_derivative(i)?;
    for (j, xi) in g.xi.iter().enumerate() {
        let dxi = xi.total_derivative(i)?;
        if dxi.is_zero() {
            continue;
        }
        let target = Jet::new(dep, parent.orders.clone()).increment(j);
        out = out.sub(&dxi.mul(&Expr::jet(target)));
    }
    Ok(out)
}

pub fn prolong(g: &Generator, order: u32) -> Result<ProlongedGenerator> {
    if order == 0 {
        return Err(SymmetryError::ZeroOrder);
    }
    let dim = g.dim();
    let mut local = BTreeMap::new();
    for (dep, phi) in g.phi.iter().enumerate() {
        local.insert(Jet::base(dep, dim), phi.clone());
        for k in 1..=order {
            for orders in multi_indices(dim, k) {
                let i = orders.iter().position(|&o| o > 0).unwrap();
                let mut parent = orders.clone();
                parent[i] -= 1;
                let parent = Jet::new(dep, parent);
                let phi_parent = local[&parent].clone();
                let v = next_coefficient(g, dep, &parent, &phi_parent, i)?;
                local.insert(Jet::new(dep, orders), v);
            }
        }
    }
    Ok(ProlongedGenerator { base: g.clone(), order, local, transformed: BTreeMap::new() })
}

/// Adds `T(φ_J)` for every transformed jet occurring in `sys`.
pub fn prolong_reflected(g: &Generator, sys: &EquationSystem, order: u32) -> Result<ProlongedGenerator> {
    let dim = sys.scope.dim();
    if g.dim() != dim || g.phi.len() != sys.scope.deps.len() {
        return Err(SymmetryError::Invalid(format!(
            "generator has {} xi and {} phi components, system has {} variables and {} unknowns",
            g.dim(),
            g.phi.len(),
            dim,
            sys.scope.deps.len()
        )));
    }
    let jets = sys.all_jets();
    if let Some(j) = jets.iter().find(|j| j.mask >> dim != 0) {
        return Err(SymmetryError::AxisOutOfRange { axis: 31 - j.mask.leading_zeros() as usize, dim });
    }
    let needed = sys.max_order().max(1);
    if order < needed {
        return Err(SymmetryError::Invalid(format!("order {order} is below the system order {needed}")));
    }
    let mut p = prolong(g, order)?;
    for j in jets.iter().filter(|j| !j.is_local()) {
        let v = p.local[&j.local()].to_family_of(j);
        p.transformed.insert(j.clone(), v);
    }
    Ok(p)
}

impl ProlongedGenerator {
    /// The coefficient of `∂/∂jet` in the prolonged field.
    pub fn coefficient(&self, jet: &Jet) -> Option<Expr> {
        if jet.is_local() {
            return self.local.get(jet).cloned();
        }
        if let Some(v) = self.transformed.get(jet) {
            return Some(v.clone());
        }
        self.local.get(&jet.local()).map(|v| v.to_family_of(jet))
    }

    /// Recomputes every stored `φ_J` with `|J| ≥ 1` from each of its
    /// parents and compares. Returns the first inconsistent jet.
    pub fn recheck(&self) -> Result<Option<Jet>> {
        for (jet, v) in &self.local {
            for i in 0..jet.orders.len() {
                if jet.orders[i] == 0 {
                    continue;
                }
                let mut parent = jet.orders.clone();
                parent[i] -= 1;
                let parent = Jet::new(jet.dep, parent);
                let again = next_coefficient(&self.base, jet.dep, &parent, &self.local[&parent], i)?;
                if &again != v {
                    return Ok(Some(jet.clone()));
                }
            }
        }
        Ok(None)
    }
}

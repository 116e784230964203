use crate::expr::{Atom, Expr, Jet};
use crate::system::EquationSystem;

use super::condition::reduce_on_solutions;
use super::prolong::prolong;
use super::{Generator, Result};

/// `v(f)` for a function `f` of the base variables and order-zero jets.
/// Conjugated jets receive the conjugate component.
pub fn apply_field(g: &Generator, f: &Expr) -> Result<Expr> {
    let dim = g.dim();
    let mut acc = Vec::new();
    for (i, xi) in g.xi.iter().enumerate() {
        if !xi.is_zero() && f.contains_var(i) {
            acc.push(xi.mul(&f.partial(&Atom::Var(i))?));
        }
    }
    for j in f.jets() {
        let comp = &g.phi[j.dep];
        if comp.is_zero() {
            continue;
        }
        let coeff = if j == Jet::base(j.dep, dim) {
            comp.clone()
        } else {
            comp.to_family_of(&j)
        };
        acc.push(coeff.mul(&f.partial(&Atom::Jet(j))?));
    }
    Ok(acc.into_iter().sum())
}

/// `[v, w] = v∘w − w∘v`, componentwise `v(w^k) − w(v^k)`.
pub fn lie_bracket(v: &Generator, w: &Generator) -> Result<Generator> {
    let comp = |a: &Expr, b: &Expr| -> Result<Expr> { Ok(apply_field(v, b)?.sub(&apply_field(w, a)?)) };
    Ok(Generator {
        name: None,
        xi: v.xi.iter().zip(&w.xi).map(|(a, b)| comp(a, b)).collect::<Result<_>>()?,
        phi: v.phi.iter().zip(&w.phi).map(|(a, b)| comp(a, b)).collect::<Result<_>>()?,
    })
}

/// Characteristics `Q^α = φ^α − ξⁱ u^α_{1_i}`, restricted to solutions of
/// `sys` when given.
pub fn to_evolutionary(g: &Generator, sys: Option<&EquationSystem>) -> Result<Vec<Expr>> {
    let dim = g.dim();
    g.phi
        .iter()
        .enumerate()
        .map(|(dep, phi)| {
            let mut q = phi.clone();
            for (i, xi) in g.xi.iter().enumerate() {
                q = q.sub(&xi.mul(&Expr::jet(Jet::base(dep, dim).increment(i))));
            }
            match sys {
                Some(s) if !s.leading.is_empty() => reduce_on_solutions(&q, s),
                _ => Ok(q),
            }
        })
        .collect()
}

/// The linearized condition rebuilt from the evolutionary form:
/// `ξⁱ D_i F + Σ T(D_J Q) ∂F/∂T(u_J) + Σ (T(ξⁱ) − sᵢ ξⁱ) T(u_{J+1_i}) ∂F/∂T(u_J)`,
/// where `sᵢ = −1` on reflected axes. The last sum vanishes for local
/// systems with real coefficients.
pub fn evolutionary_residual(sys: &EquationSystem, g: &Generator) -> Result<Vec<Expr>> {
    let dim = g.dim();
    let q = to_evolutionary(g, None)?;
    let qg = Generator::new(vec![Expr::zero(); dim], q);
    let order = sys.max_order().max(1);
    let pq = prolong(&qg, order)?;
    let mut out = Vec::with_capacity(sys.equations.len());
    for eq in &sys.equations {
        let f = &eq.expr;
        let mut acc = Vec::new();
        for (i, xi) in g.xi.iter().enumerate() {
            if !xi.is_zero() {
                acc.push(xi.mul(&f.total_derivative(i)?));
            }
        }
        for j in f.jets() {
            let df = f.partial(&Atom::Jet(j.clone()))?;
            let dq = pq.local[&j.local()].to_family_of(&j);
            acc.push(dq.mul(&df));
            if j.is_local() {
                continue;
            }
            for (i, xi) in g.xi.iter().enumerate() {
                let s = if j.mask >> i & 1 == 1 { xi.neg() } else { xi.clone() };
                let corr = xi.to_family_of(&j).sub(&s);
                if corr.is_zero() {
                    continue;
                }
                acc.push(corr.mul(&Expr::jet(j.increment(i))).mul(&df));
            }
        }
        out.push(acc.into_iter().sum());
    }
    Ok(out)
}

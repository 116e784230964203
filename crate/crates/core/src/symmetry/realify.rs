use crate::expr::{Atom, Bindings, Expr, Jet, Symbol};
use crate::scope::Scope;
use crate::system::{Equation, EquationSystem};

use super::Result;

/// Splits each complex unknown `q = u − i v` into two real unknowns and each
/// equation into its real and imaginary part. Real systems are returned
/// unchanged. With a single unknown the new names are `u` and `v`.
pub fn realify(sys: &EquationSystem) -> Result<EquationSystem> {
    if !sys.is_complex() {
        return Ok(sys.clone());
    }
    let n = sys.scope.deps.len();
    let names: Vec<Symbol> = if n == 1 && !sys.scope.is_declared("u") && !sys.scope.is_declared("v") {
        vec!["u".into(), "v".into()]
    } else {
        sys.scope.deps.iter().flat_map(|d| [format!("{d}_re").into(), format!("{d}_im").into()]).collect()
    };
    let scope = Scope { vars: sys.scope.vars.clone(), deps: names, complex: false };
    let mut jets = sys.all_jets();
    for l in &sys.leading {
        jets.insert(l.jet.clone());
    }
    let mut b = Bindings::new();
    for j in jets.iter().map(|j| j.local()).collect::<std::collections::BTreeSet<_>>() {
        let u = Expr::jet(Jet { dep: 2 * j.dep, ..j.clone() });
        let v = Expr::jet(Jet { dep: 2 * j.dep + 1, ..j.clone() });
        b = b.jet(j, u.sub(&v.mul(&Expr::i())));
    }
    let strip_conj = |e: &Expr| -> Result<Expr> {
        Ok(e.map_atoms(&mut |a| match a {
            Atom::Jet(j) => Ok(Expr::jet(j.clone().with_conj(false))),
            other => Ok(Expr::from_atom(other.clone())),
        })?)
    };
    let mut equations = Vec::new();
    for eq in &sys.equations {
        let e = strip_conj(&eq.expr.substitute(&b)?)?;
        let (re, im) = e.split_re_im();
        for (suffix, part) in [("re", re), ("im", im)] {
            if !part.is_zero() {
                equations.push(Equation { name: format!("{}_{suffix}", eq.name), expr: part });
            }
        }
    }
    let mut out = EquationSystem::new(scope, equations).map_err(|e| super::SymmetryError::Invalid(e.to_string()))?;
    for l in &sys.leading {
        let candidates = [Jet { dep: 2 * l.jet.dep, ..l.jet.clone() }, Jet { dep: 2 * l.jet.dep + 1, ..l.jet.clone() }];
        for c in &candidates {
            let target = out.equations.iter().position(|eq| {
                let js = eq.expr.jets();
                js.contains(c) && candidates.iter().filter(|o| *o != c).all(|o| !js.contains(o))
            });
            if let Some(k) = target {
                let name = out.equations[k].name.clone();
                if out.leading.iter().all(|x| x.equation != k) {
                    out.solve_for(c.clone(), &name).map_err(|e| super::SymmetryError::Invalid(e.to_string()))?;
                }
            }
        }
    }
    Ok(out)
}

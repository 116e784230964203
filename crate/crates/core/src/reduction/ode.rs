use crate::expr::{Atom, Bindings, Expr, Func, Jet, Monomial};
use crate::GaussRat;

use super::apply::strip_nonvanishing;
use super::{target_scope, ReducedOde, ReductionError, Result};

fn jet_part(m: &Monomial) -> Monomial {
    Monomial(m.atoms().filter(|(a, _)| matches!(a, Atom::Jet(_))).cloned().collect())
}

fn rest_part(m: &Monomial) -> Monomial {
    Monomial(m.atoms().filter(|(a, _)| !matches!(a, Atom::Jet(_))).cloned().collect())
}

/// Collects the terms of `e` whose jet part equals `key`, without the jets.
fn coefficient_of_jets(e: &Expr, key: &Monomial) -> Expr {
    e.terms()
        .filter(|(m, _)| jet_part(m) == *key)
        .map(|(m, c)| Expr::term(c.clone(), rest_part(m)))
        .sum()
}

fn nonvanishing_atom(a: &Atom) -> bool {
    match a {
        Atom::Param(_) | Atom::Var(_) | Atom::Pi | Atom::Root(..) => true,
        Atom::Func(Func::Exp, _) => true,
        Atom::Sum(s) => !s.contains_jets(),
        _ => false,
    }
}

/// `Some(F)` when `a = F·b` for a single jet-free term `F` built from
/// constants, parameters, powers, roots and exponentials.
fn proportional(a: &Expr, b: &Expr) -> Option<Expr> {
    if a.is_zero() || b.is_zero() {
        return (a.is_zero() && b.is_zero()).then(Expr::one);
    }
    let keys: Vec<Monomial> = {
        let mut k: Vec<_> = b.terms().map(|(m, _)| jet_part(m)).collect();
        k.dedup();
        k
    };
    for key in keys {
        let eb = coefficient_of_jets(b, &key);
        let Some((mb, cb)) = eb.as_term() else { continue };
        let ga = coefficient_of_jets(a, &key);
        let Some((ma, ca)) = ga.as_term() else { return None };
        let f = Expr::term(ca.clone(), ma.clone()).div(&Expr::term(cb.clone(), mb.clone())).ok()?;
        let (mf, _) = f.as_term()?;
        if !mf.atoms().all(|(at, _)| nonvanishing_atom(at)) {
            return None;
        }
        return (a.sub(&f.mul(b))).is_zero().then_some(f);
    }
    None
}

/// True iff `got` equals `expected` up to a nonvanishing factor. Each
/// constant named in `signed` may additionally change sign.
pub fn compare_canonical(got: &ReducedOde, expected: &Expr, signed: &[&str]) -> bool {
    matching_form(got, expected, signed).is_some()
}

/// The sign variant of `expected` that `got` matches, if any.
pub fn matching_form(got: &ReducedOde, expected: &Expr, signed: &[&str]) -> Option<Expr> {
    let g = strip_nonvanishing(&got.expr).ok()?;
    let mut variants = vec![expected.clone()];
    for c in signed {
        let flip = Bindings::new().param(c, Expr::param(c).neg());
        let more: Vec<Expr> = variants.iter().filter_map(|v| v.substitute(&flip).ok()).collect();
        variants.extend(more);
    }
    variants.into_iter().find(|v| strip_nonvanishing(v).is_ok_and(|v| proportional(&g, &v).is_some()))
}

/// Rewrites a local ODE in `p(y)` for `y = map(z)` and `p̂(z) = p(y)`.
/// `map` is an expression in the target scope `(z; p)`.
pub fn change_of_variable(ode: &ReducedOde, variable: &str, map: &Expr) -> Result<ReducedOde> {
    if !ode.is_local() {
        return Err(ReductionError::Unsupported("change of variable needs a local ODE".into()));
    }
    if map.contains_jets() {
        return Err(ReductionError::NotInvertible("the map may not involve the unknown".into()));
    }
    let dmap = map.total_derivative(0)?;
    if dmap.is_zero() {
        return Err(ReductionError::NotInvertible("the map is constant".into()));
    }
    let inv = dmap.recip()?;
    let max = ode.expr.jets().iter().map(|j| j.orders[0]).max().unwrap_or(0);
    let mut table = vec![Expr::jet(Jet::new(0, vec![0]))];
    for k in 0..max as usize {
        let next = table[k].total_derivative(0)?.mul(&inv);
        table.push(next);
    }
    let e = ode.expr.map_atoms(&mut |a| match a {
        Atom::Var(0) => Ok(map.clone()),
        Atom::Jet(j) => {
            let v = table[j.orders[0] as usize].clone();
            Ok(if j.conj { v.conjugate() } else { v })
        }
        other => Ok(Expr::from_atom(other.clone())),
    })?;
    let scope = target_scope(variable, &ode.scope.deps[0], ode.scope.complex);
    Ok(ReducedOde::new(scope, strip_nonvanishing(&e)?))
}

/// `∫ e d(atom)` for `e` polynomial (Laurent, without `atom^{-1}`) in the
/// atom.
fn integrate_in(e: &Expr, atom: &Atom) -> Result<Expr> {
    let mut out = Vec::new();
    for (m, c) in e.terms() {
        let k = m.exponent_of(atom);
        let nested = m.atoms().any(|(a, _)| a != atom && a.children().iter().any(|ch| ch.any_atom(&mut |x| x == atom)));
        if nested || k == -1 {
            return Err(ReductionError::NotIntegrable(format!("term with {atom:?}^{k}")));
        }
        let rest = Expr::term(c.clone(), Monomial(m.atoms().filter(|(a, _)| a != atom).cloned().collect()));
        let power = Expr::from_atom(atom.clone()).pow(k + 1)?;
        out.push(rest.mul(&power).scale(&GaussRat::ratio(1, i64::from(k + 1))));
    }
    Ok(out.into_iter().sum())
}

fn top_order(e: &Expr) -> Result<Option<u32>> {
    let jets = e.jets();
    if jets.iter().any(|j| j.mask != 0 || j.conj || j.has_shift()) {
        return Err(ReductionError::NotIntegrable("only local real ODEs are integrated".into()));
    }
    Ok(jets.iter().map(|j| j.orders[0]).max())
}

/// Finds `F` with `D_y F = ode` by peeling off the highest derivative, then
/// returns `F + constant`.
pub fn integrate_once(ode: &ReducedOde, constant: &str) -> Result<ReducedOde> {
    let mut rest = ode.expr.clone();
    let mut f = Expr::zero();
    let mut last = u32::MAX;
    while let Some(n) = top_order(&rest)? {
        if n == 0 {
            return Err(ReductionError::NotIntegrable("a term in the unknown is not a derivative".into()));
        }
        if n >= last {
            return Err(ReductionError::NotIntegrable("no progress".into()));
        }
        last = n;
        let top = Atom::Jet(Jet::new(0, vec![n]));
        let c = rest.partial(&top)?;
        if c.any_atom(&mut |a| *a == top) {
            return Err(ReductionError::NotIntegrable("nonlinear in the highest derivative".into()));
        }
        let f1 = integrate_in(&c, &Atom::Jet(Jet::new(0, vec![n - 1])))?;
        rest = rest.sub(&f1.total_derivative(0)?);
        f = f.add(&f1);
    }
    if !rest.is_zero() {
        f = f.add(&integrate_in(&rest, &Atom::Var(0))?);
    }
    if f.total_derivative(0)? != ode.expr {
        return Err(ReductionError::NotIntegrable("antiderivative check failed".into()));
    }
    Ok(ReducedOde::new(ode.scope.clone(), f.add(&Expr::param(constant))))
}

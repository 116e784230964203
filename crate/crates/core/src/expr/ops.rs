//! Structural operations: atom maps, reflection, conjugation, substitution
//! and differentiation.

use std::collections::{HashMap, HashSet};

use super::build::{self, func, root};
use super::{Atom, Expr, ExprError, Func, Jet, Monomial, Result, Symbol};
use crate::coeff::GaussRat;

/// Rebuilds a composite atom after mapping its children with `inner`.
/// Leaf atoms are returned unchanged. For [`Atom::Sum`] the mapped sum is
/// returned without the (negative) exponent, which the caller applies.
pub(crate) fn rebuild_atom(atom: &Atom, inner: &mut dyn FnMut(&Expr) -> Result<Expr>) -> Result<Expr> {
    match atom {
        Atom::Root(n, arg) => root(*n, &inner(arg)?),
        Atom::Func(f, args) => {
            let args = args.iter().map(|a| inner(a)).collect::<Result<Vec<_>>>()?;
            func(*f, args)
        }
        Atom::Sum(s) => inner(s),
        Atom::Jet(j) if !j.shift.is_empty() => {
            let shift = j.shift.iter().map(|s| inner(s)).collect::<Result<Vec<_>>>()?;
            Ok(Expr::jet(Jet { shift: normalize_shift(shift), ..j.clone() }))
        }
        leaf => Ok(Expr::leaf(leaf.clone())),
    }
}

/// All-zero shifts are stored as an empty vector.
pub(crate) fn normalize_shift(shift: Vec<Expr>) -> Vec<Expr> {
    if shift.iter().all(|s| s.is_zero()) {
        Vec::new()
    } else {
        shift
    }
}

impl Expr {
    /// Replaces every atom `a` by `f(a)` and rebuilds `Σ c·Π f(a)^k`.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Result<Expr>) -> Result<Expr> {
        let mut cache: HashMap<&Atom, Expr> = HashMap::new();
        let mut parts = Vec::with_capacity(self.len());
        for (m, c) in self.terms() {
            let mut t = Expr::constant(c.clone());
            for (a, k) in m.atoms() {
                let img = match cache.get(a) {
                    Some(e) => e.clone(),
                    None => {
                        let e = f(a)?;
                        cache.insert(a, e.clone());
                        e
                    }
                };
                t = t.mul(&img.pow(*k)?);
            }
            parts.push(t);
        }
        Ok(parts.into_iter().sum())
    }

    /// Maps coefficients; atoms are mapped by `f` as in [`Expr::map_atoms`].
    pub(crate) fn map_coeffs_atoms(
        &self,
        g: &dyn Fn(&GaussRat) -> GaussRat,
        f: &mut dyn FnMut(&Atom) -> Result<Expr>,
    ) -> Result<Expr> {
        let mut cache: HashMap<&Atom, Expr> = HashMap::new();
        let mut parts = Vec::with_capacity(self.len());
        for (m, c) in self.terms() {
            let mut t = Expr::constant(g(c));
            for (a, k) in m.atoms() {
                let img = match cache.get(a) {
                    Some(e) => e.clone(),
                    None => {
                        let e = f(a)?;
                        cache.insert(a, e.clone());
                        e
                    }
                };
                t = t.mul(&img.pow(*k)?);
            }
            parts.push(t);
        }
        Ok(parts.into_iter().sum())
    }

    /// Evaluates every coordinate at `R(x) + s`: base variables on the
    /// masked axes are negated, then shifted; jet masks are toggled and their
    /// shifts composed.
    pub fn transform_point(&self, mask: u32, shift: &[Expr]) -> Expr {
        let shift_of = |i: usize| shift.get(i).cloned().unwrap_or_else(Expr::zero);
        self.map_atoms(&mut |a| match a {
            Atom::Var(i) => {
                let v = Expr::var(*i);
                let v = if mask >> i & 1 == 1 { v.neg() } else { v };
                Ok(v.add(&shift_of(*i)))
            }
            Atom::Jet(j) => {
                let dim = j.orders.len();
                let mut new_shift = Vec::with_capacity(dim);
                for axis in 0..dim {
                    let outer = shift_of(axis);
                    let outer = if j.mask >> axis & 1 == 1 { outer.neg() } else { outer };
                    let own = j.shift.get(axis).cloned().unwrap_or_else(Expr::zero);
                    new_shift.push(own.add(&outer));
                }
                Ok(Expr::jet(Jet {
                    mask: j.mask ^ (mask & ((1u32 << dim) - 1)),
                    shift: normalize_shift(new_shift),
                    ..j.clone()
                }))
            }
            other => rebuild_atom(other, &mut |e| Ok(e.transform_point(mask, shift))),
        })
        .expect("point transforms preserve well-formedness")
    }

    /// Reflects the axes in `mask`: `x ↦ -x`, jet masks toggled.
    pub fn reflect(&self, mask: u32) -> Expr {
        self.transform_point(mask, &[])
    }

    /// Complex conjugation: constants conjugated, jet conjugation toggled;
    /// base variables and parameters are real.
    pub fn conjugate(&self) -> Expr {
        self.map_coeffs_atoms(&|c| c.conj(), &mut |a| match a {
            Atom::Jet(j) => {
                let shift = j.shift.iter().map(|s| s.conjugate()).collect();
                Ok(Expr::jet(Jet { conj: !j.conj, shift: normalize_shift(shift), ..j.clone() }))
            }
            other => rebuild_atom(other, &mut |e| Ok(e.conjugate())),
        })
        .expect("conjugation preserves well-formedness")
    }

    /// Applies the point transform and conjugation that carry a local jet to
    /// `target`'s family.
    pub fn to_family_of(&self, target: &Jet) -> Expr {
        // conjugate first so the target's shift is applied unconjugated
        let e = if target.conj { self.conjugate() } else { self.clone() };
        if target.mask != 0 || target.has_shift() {
            e.transform_point(target.mask, &target.shift)
        } else {
            e
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum BindingKey {
    Var(usize),
    Param(Symbol),
    Jet(Jet),
}

/// Simultaneous substitution map.
#[derive(Clone, Default, Debug)]
pub struct Bindings {
    map: HashMap<BindingKey, Expr>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn bind(&mut self, key: BindingKey, value: Expr) -> &mut Self {
        self.map.insert(key, value);
        self
    }

    pub fn var(mut self, axis: usize, value: Expr) -> Self {
        self.map.insert(BindingKey::Var(axis), value);
        self
    }

    pub fn param(mut self, name: &str, value: Expr) -> Self {
        self.map.insert(BindingKey::Param(Symbol::from(name)), value);
        self
    }

    pub fn jet(mut self, jet: Jet, value: Expr) -> Self {
        self.map.insert(BindingKey::Jet(jet), value);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, key: &BindingKey) -> Option<&Expr> {
        self.map.get(key)
    }

    fn keys_in(&self, e: &Expr) -> Vec<BindingKey> {
        let mut out = Vec::new();
        e.any_atom(&mut |a| {
            match a {
                Atom::Var(i) => out.push(BindingKey::Var(*i)),
                Atom::Param(p) => out.push(BindingKey::Param(p.clone())),
                Atom::Jet(j) => out.push(BindingKey::Jet(j.local())),
                _ => {}
            }
            false
        });
        out.retain(|k| self.map.contains_key(k));
        out
    }

    /// Rejects cycles of length at least two in the dependency graph between
    /// bound keys. A self-reference is fine under simultaneous substitution.
    pub fn check_acyclic(&self) -> Result<()> {
        let graph: HashMap<&BindingKey, Vec<BindingKey>> = self
            .map
            .iter()
            .map(|(k, v)| (k, self.keys_in(v).into_iter().filter(|d| d != k).collect()))
            .collect();
        let mut done: HashSet<&BindingKey> = HashSet::new();
        for start in graph.keys() {
            let mut on_path: Vec<&BindingKey> = Vec::new();
            if visit(start, &graph, &mut done, &mut on_path) {
                return Err(ExprError::CyclicBinding(format!("{start:?}")));
            }
        }
        Ok(())
    }
}

fn visit<'a>(
    k: &'a BindingKey,
    graph: &'a HashMap<&'a BindingKey, Vec<BindingKey>>,
    done: &mut HashSet<&'a BindingKey>,
    on_path: &mut Vec<&'a BindingKey>,
) -> bool {
    if on_path.contains(&k) {
        return true;
    }
    if done.contains(k) {
        return false;
    }
    on_path.push(k);
    if let Some(next) = graph.get(k) {
        for n in next {
            if let Some((key, _)) = graph.get_key_value(n) {
                if visit(key, graph, done, on_path) {
                    return true;
                }
            }
        }
    }
    on_path.pop();
    done.insert(k);
    false
}

impl Expr {
    /// Simultaneous substitution. A jet bound only in its local form is
    /// replaced in every family: the bound value is reflected, shifted and
    /// conjugated to match the occurrence.
    pub fn substitute(&self, b: &Bindings) -> Result<Expr> {
        if b.is_empty() {
            return Ok(self.clone());
        }
        b.check_acyclic()?;
        self.substitute_unchecked(b)
    }

    fn substitute_unchecked(&self, b: &Bindings) -> Result<Expr> {
        self.map_atoms(&mut |a| match a {
            Atom::Var(i) => Ok(b.get(&BindingKey::Var(*i)).cloned().unwrap_or_else(|| Expr::var(*i))),
            Atom::Param(p) => {
                Ok(b.get(&BindingKey::Param(p.clone())).cloned().unwrap_or_else(|| Expr::leaf(a.clone())))
            }
            Atom::Jet(j) => {
                if let Some(v) = b.get(&BindingKey::Jet(j.clone())) {
                    return Ok(v.clone());
                }
                if let Some(v) = b.get(&BindingKey::Jet(j.local())) {
                    return Ok(v.to_family_of(j));
                }
                rebuild_atom(a, &mut |e| e.substitute_unchecked(b))
            }
            other => rebuild_atom(other, &mut |e| e.substitute_unchecked(b)),
        })
    }

    /// Chain-rule differentiation. `leaf` gives the derivative of leaf atoms
    /// (`None` means zero); composite atoms are differentiated structurally.
    pub fn differentiate(&self, leaf: &dyn Fn(&Atom) -> Result<Option<Expr>>) -> Result<Expr> {
        let mut cache: HashMap<Atom, Option<Expr>> = HashMap::new();
        differentiate_cached(self, leaf, &mut cache)
    }

    /// Total derivative `D_axis`: `D_i x^j = δ_ij`, `D_i u_J = u_{J+1_i}`,
    /// with a factor `-1` when the jet is reflected along `axis`.
    pub fn total_derivative(&self, axis: usize) -> Result<Expr> {
        self.differentiate(&|a| total_derivative_leaf(a, axis))
    }

    /// Repeated total derivatives, `D^J e`.
    pub fn total_derivative_multi(&self, orders: &[u32]) -> Result<Expr> {
        let mut e = self.clone();
        for (axis, &k) in orders.iter().enumerate() {
            for _ in 0..k {
                e = e.total_derivative(axis)?;
            }
        }
        Ok(e)
    }

    /// Partial derivative with respect to a leaf atom.
    pub fn partial(&self, target: &Atom) -> Result<Expr> {
        self.differentiate(&|a| Ok((a == target).then(Expr::one)))
    }
}

pub(crate) fn total_derivative_leaf(a: &Atom, axis: usize) -> Result<Option<Expr>> {
    Ok(match a {
        Atom::Var(i) => (*i == axis).then(Expr::one),
        Atom::Jet(j) => {
            if axis >= j.orders.len() {
                return Err(ExprError::AxisOutOfRange { axis, dim: j.orders.len() });
            }
            let d = Expr::jet(j.increment(axis));
            Some(if j.mask >> axis & 1 == 1 { d.neg() } else { d })
        }
        _ => None,
    })
}

fn differentiate_cached(
    e: &Expr,
    leaf: &dyn Fn(&Atom) -> Result<Option<Expr>>,
    cache: &mut HashMap<Atom, Option<Expr>>,
) -> Result<Expr> {
    let mut parts = Vec::new();
    for (m, c) in e.terms() {
        for (idx, (a, k)) in m.atoms().enumerate() {
            let da = match cache.get(a) {
                Some(d) => d.clone(),
                None => {
                    let d = atom_derivative(a, leaf, cache)?;
                    cache.insert(a.clone(), d.clone());
                    d
                }
            };
            let Some(da) = da else { continue };
            let mut raw = m.0.clone();
            raw[idx].1 -= 1;
            raw.retain(|(_, e)| *e != 0);
            let rest = if build::needs_normalizing(&raw) {
                build::normalize_monomial(raw)
            } else {
                Expr::term(GaussRat::one(), Monomial(raw))
            };
            let coeff = c * &GaussRat::int(*k as i64);
            parts.push(rest.mul(&da).scale(&coeff));
        }
    }
    Ok(parts.into_iter().sum())
}

fn atom_derivative(
    a: &Atom,
    leaf: &dyn Fn(&Atom) -> Result<Option<Expr>>,
    cache: &mut HashMap<Atom, Option<Expr>>,
) -> Result<Option<Expr>> {
    let d = match a {
        Atom::Pi | Atom::Param(_) | Atom::Var(_) | Atom::Jet(_) => return leaf(a),
        Atom::Sum(s) => differentiate_cached(s, leaf, cache)?,
        Atom::Root(n, arg) => {
            let darg = differentiate_cached(arg, leaf, cache)?;
            if darg.is_zero() {
                return Ok(None);
            }
            let r = Expr::term(GaussRat::one(), Monomial(vec![(a.clone(), 1)]));
            r.mul(&darg).mul(&arg.recip()?).scale(&GaussRat::ratio(1, *n as i64))
        }
        Atom::Func(f, args) => {
            let du = differentiate_cached(&args[0], leaf, cache)?;
            if args.len() > 1 && !differentiate_cached(&args[1], leaf, cache)?.is_zero() {
                return Err(ExprError::Unsupported(format!(
                    "derivative of {} with respect to its modulus",
                    f.name()
                )));
            }
            if du.is_zero() {
                return Ok(None);
            }
            let me = Expr::term(GaussRat::one(), Monomial(vec![(a.clone(), 1)]));
            let call = |g: Func| func(g, args.clone());
            let outer = match f {
                Func::Exp => me,
                Func::Log => args[0].recip()?,
                Func::Sin => call(Func::Cos)?,
                Func::Cos => call(Func::Sin)?.neg(),
                Func::Tanh => Expr::one().sub(&me.pow(2)?),
                Func::Sech => me.mul(&call(Func::Tanh)?).neg(),
                Func::Sn => call(Func::Cn)?.mul(&call(Func::Dn)?),
                Func::Cn => call(Func::Sn)?.mul(&call(Func::Dn)?).neg(),
                Func::Dn => args[1].mul(&call(Func::Sn)?).mul(&call(Func::Cn)?).neg(),
                Func::Abs => me.mul(&args[0].recip()?),
            };
            outer.mul(&du)
        }
    };
    Ok((!d.is_zero()).then_some(d))
}

use std::collections::{BTreeSet, HashMap};

use crate::expr::{self, Atom, Bindings, Expr, Func, Jet};
use crate::system::EquationSystem;
use crate::GaussRat;

use super::{Parity, ReducedOde, ReductionError, ReductionSpec, Result};

/// Substitutes the declared invariant form into every equation of `sys`
/// and returns the reduced ODE with nonvanishing factors divided out.
pub fn apply_reduction(sys: &EquationSystem, spec: &ReductionSpec) -> Result<Vec<ReducedOde>> {
    if sys.scope.deps.len() != 1 {
        return Err(ReductionError::Unsupported("reductions need exactly one dependent variable".into()));
    }
    let p_dep = 1;
    let reducer = Reducer::new(sys, spec, p_dep)?;
    reducer.check_parity()?;

    let mut out = Vec::with_capacity(sys.equations.len());
    for eq in &sys.equations {
        let mut cache: HashMap<Jet, Expr> = HashMap::new();
        let e = eq.expr.map_atoms(&mut |a| match a {
            Atom::Jet(j) => {
                if j.has_shift() {
                    return Err(expr::ExprError::Unsupported("shifted jets cannot be reduced".into()));
                }
                if let Some(v) = cache.get(j) {
                    return Ok(v.clone());
                }
                let v = reducer.family_value(j)?;
                cache.insert(j.clone(), v.clone());
                Ok(v)
            }
            other => Ok(Expr::from_atom(other.clone())),
        })?;
        let e = reducer.eliminate(&e)?;
        let scope = spec.target_scope(sys);
        out.push(ReducedOde::new(scope, e));
    }
    Ok(out)
}

struct Reducer<'a> {
    spec: &'a ReductionSpec,
    dim: usize,
    p_dep: usize,
    masks: Vec<u32>,
    /// `D_i y`
    dy: Vec<Expr>,
    /// `D_i s` per chart parameter.
    chart_d: HashMap<String, Vec<Expr>>,
    /// `s ↦ ±s` per reflection mask.
    chart_sign: HashMap<(String, u32), i64>,
}

impl<'a> Reducer<'a> {
    fn new(sys: &EquationSystem, spec: &'a ReductionSpec, p_dep: usize) -> Result<Self> {
        let dim = sys.scope.dim();
        let masks: Vec<u32> = sys.reflection_masks().into_iter().filter(|m| *m != 0).collect();
        let mut chart_d = HashMap::new();
        let mut chart_sign = HashMap::new();
        for c in &spec.charts {
            let d = (0..dim).map(|i| c.expr.total_derivative(i)).collect::<expr::Result<Vec<_>>>()?;
            chart_d.insert(c.name.clone(), d);
            for &m in &masks {
                let r = c.expr.reflect(m);
                let sign = if r == c.expr {
                    1
                } else if r == c.expr.neg() {
                    -1
                } else {
                    return Err(ReductionError::NotInvariant(format!(
                        "chart `{}` is neither even nor odd under the reflection",
                        c.name
                    )));
                };
                chart_sign.insert((c.name.clone(), m), sign);
            }
        }
        let mut r = Reducer { spec, dim, p_dep, masks, dy: Vec::new(), chart_d, chart_sign };
        r.dy = (0..dim).map(|i| r.derivative(&spec.invariant, i)).collect::<Result<_>>()?;
        Ok(r)
    }

    /// Total derivative treating chart parameters as functions of `x` and
    /// `p^{(k)}` as evaluated at `y(x)`.
    fn derivative(&self, e: &Expr, axis: usize) -> Result<Expr> {
        Ok(e.differentiate(&|a| {
            Ok(match a {
                Atom::Var(i) => (*i == axis).then(Expr::one),
                Atom::Param(p) => self.chart_d.get(&**p).map(|d| d[axis].clone()),
                Atom::Jet(j) if j.dep == self.p_dep => {
                    let next = Expr::jet(j.increment(0)).mul(&self.dy[axis]);
                    Some(if j.mask & 1 == 1 { next.neg() } else { next })
                }
                _ => None,
            })
        })?)
    }

    fn check_parity(&self) -> Result<()> {
        let y = &self.spec.invariant;
        for &m in &self.masks {
            let r = self.reflect(y, m)?;
            let ok = match self.spec.parity {
                Parity::Fixed => (0..self.dim).all(|i| m >> i & 1 == 0 || !y.contains_var(i)) && r == *y,
                Parity::Even => r == *y,
                Parity::Odd => r == y.neg(),
            };
            if !ok {
                return Err(ReductionError::Parity {
                    declared: self.spec.parity.name(),
                    got: format!("{r:?}"),
                });
            }
        }
        Ok(())
    }

    fn odd_under(&self, mask: u32) -> bool {
        mask != 0 && self.spec.parity == Parity::Odd
    }

    /// Evaluates at the reflected point: base variables and chart
    /// parameters change sign as declared, `p` jets move to `-y` when `y`
    /// is odd.
    fn reflect(&self, e: &Expr, mask: u32) -> Result<Expr> {
        if mask == 0 {
            return Ok(e.clone());
        }
        let odd = self.odd_under(mask);
        Ok(e.map_atoms(&mut |a| match a {
            Atom::Var(i) => Ok(if mask >> i & 1 == 1 { Expr::var(*i).neg() } else { Expr::var(*i) }),
            Atom::Param(p) => {
                let s = Expr::leaf(a.clone());
                Ok(match self.chart_sign.get(&(p.to_string(), mask)) {
                    Some(-1) => s.neg(),
                    _ => s,
                })
            }
            Atom::Jet(j) if j.dep == self.p_dep => {
                Ok(Expr::jet(if odd { Jet { mask: j.mask ^ 1, ..j.clone() } } else { j.clone() }))
            }
            Atom::Jet(_) => Err(expr::ExprError::Unsupported("unexpected jet in a reduction".into())),
            other => crate::expr::rebuild_atom(other, &mut |x| {
                self.reflect(x, mask).map_err(|e| expr::ExprError::Unsupported(e.to_string()))
            }),
        })?)
    }

    /// `T(u_J)` expressed through `A`, `y` and the jets of `p`.
    fn family_value(&self, j: &Jet) -> expr::Result<Expr> {
        let mut e = self.spec.multiplier.mul(&Expr::jet(Jet::new(self.p_dep, vec![0])));
        for (axis, &k) in j.orders.iter().enumerate() {
            for _ in 0..k {
                e = self.derivative(&e, axis).map_err(|x| expr::ExprError::Unsupported(x.to_string()))?;
            }
        }
        if j.conj {
            e = e.conjugate();
        }
        self.reflect(&e, j.mask).map_err(|x| expr::ExprError::Unsupported(x.to_string()))
    }

    /// Divides out nonvanishing factors, eliminates the base variables via
    /// the inverse map, and moves to the target scope.
    fn eliminate(&self, e: &Expr) -> Result<Expr> {
        let (axis, inv) = &self.spec.inverse;
        let yname = self.spec.variable.as_str();
        let e = e.substitute(&Bindings::new().var(*axis, inv.clone()))?;
        let e = strip_nonvanishing(&e)?;
        let stray: BTreeSet<String> = (0..self.dim)
            .filter(|&i| e.contains_var(i))
            .map(|i| format!("variable {i}"))
            .chain(self.spec.charts.iter().filter(|c| e.contains_param(&c.name)).map(|c| c.name.clone()))
            .collect();
        if !stray.is_empty() {
            return Err(ReductionError::NotInvariant(format!(
                "the substituted equation still depends on {}",
                stray.into_iter().collect::<Vec<_>>().join(", ")
            )));
        }
        let moved = e.map_atoms(&mut |a| match a {
            Atom::Jet(j) if j.dep == self.p_dep => Ok(Expr::jet(Jet { dep: 0, ..j.clone() })),
            other => Ok(Expr::from_atom(other.clone())),
        })?;
        let moved = moved.substitute(&Bindings::new().param(yname, Expr::var(0)))?;
        strip_nonvanishing(&moved)
    }
}

fn is_exp(a: &Atom) -> bool {
    matches!(a, Atom::Func(Func::Exp, _))
}

/// Divides `e` by the largest common factor built from jet-free atoms other
/// than elementary functions (parameters, variables, roots, reciprocal sums)
/// and by the exponential of the first term. All such factors are treated as
/// nonvanishing on the working chart.
pub fn strip_nonvanishing(e: &Expr) -> Result<Expr> {
    if e.is_zero() {
        return Ok(e.clone());
    }
    let mut e = e.clone();
    let first_exp = e.terms().next().and_then(|(m, _)| m.atoms().find(|(a, _)| is_exp(a)).cloned());
    if let Some((Atom::Func(_, args), k)) = first_exp {
        e = e.mul(&expr::exp(&args[0].scale(&GaussRat::int(-i64::from(k)))));
    }
    let mut mins: HashMap<Atom, i32> = HashMap::new();
    let mut candidates: BTreeSet<Atom> = BTreeSet::new();
    for (m, _) in e.terms() {
        for (a, _) in m.atoms() {
            let strippable = match a {
                Atom::Param(_) | Atom::Var(_) | Atom::Pi => true,
                Atom::Root(_, arg) | Atom::Sum(arg) => !arg.contains_jets(),
                _ => false,
            };
            if strippable {
                candidates.insert(a.clone());
            }
        }
    }
    for a in &candidates {
        let min = e.terms().map(|(m, _)| m.exponent_of(a)).min().unwrap_or(0);
        if min != 0 {
            mins.insert(a.clone(), min);
        }
    }
    if mins.is_empty() {
        return Ok(e);
    }
    let mut factor = Expr::one();
    for (a, k) in mins {
        factor = factor.mul(&Expr::from_atom(a).pow(-k)?);
    }
    Ok(e.mul(&factor))
}

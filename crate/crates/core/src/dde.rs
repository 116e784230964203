//! Changes of independent variables that turn reflections into shifts.
//!
//! Under `x = exp(x̂)` the reflection `x ↦ -x` becomes `x̂ ↦ x̂ + iπ`, so a
//! nonlocal equation becomes a differential-difference equation. Hats are
//! dropped: the new variables keep the old names.

use thiserror::Error;

use crate::expr::{self, rebuild_atom, Atom, Expr, ExprError, Jet};
use crate::reduction::{strip_nonvanishing, ReducedOde, ReductionError};
use crate::system::{Equation, EquationSystem, SystemError};
use crate::GaussRat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DdeError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("scale factor on axis {0} is zero")]
    ZeroScale(usize),
    #[error("{0}")]
    Unsupported(String),
}

impl From<ReductionError> for DdeError {
    fn from(e: ReductionError) -> Self {
        DdeError::Unsupported(e.to_string())
    }
}

pub type Result<T, E = DdeError> = std::result::Result<T, E>;

/// How an old axis is expressed through the new one.
#[derive(Clone, Debug, PartialEq)]
pub enum AxisMap {
    Identity,
    /// `x = s·x̂`
    Scale(Expr),
    /// `x = exp(s·x̂)`
    Exp(Expr),
}

/// Reading of conjugated families under a complex change of variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConjRule {
    /// `q*` is an independent function: it is rescaled and shifted like `q`.
    Formal,
    /// `q*` is the Schwarz function `w ↦ conj(q(conj w))`, the analytic
    /// continuation of the conjugate. An imaginary scale turns a reflected
    /// conjugate into an unreflected one.
    Schwarz,
}

fn is_real(s: &Expr) -> bool {
    s.conjugate() == *s
}

fn is_imaginary(s: &Expr) -> bool {
    s.conjugate() == s.neg()
}

struct Transform<'a> {
    maps: &'a [AxisMap],
    rule: ConjRule,
}

impl Transform<'_> {
    fn check(&self) -> Result<()> {
        for (i, m) in self.maps.iter().enumerate() {
            if let AxisMap::Scale(s) | AxisMap::Exp(s) = m {
                if s.is_zero() {
                    return Err(DdeError::ZeroScale(i));
                }
                if (0..self.maps.len()).any(|k| s.contains_var(k)) || s.contains_jets() {
                    return Err(DdeError::Unsupported(format!("scale on axis {i} must be constant")));
                }
            }
        }
        Ok(())
    }

    fn var(&self, i: usize) -> Expr {
        match self.maps.get(i) {
            Some(AxisMap::Scale(s)) => s.mul(&Expr::var(i)),
            Some(AxisMap::Exp(s)) => expr::exp(&s.mul(&Expr::var(i))),
            _ => Expr::var(i),
        }
    }

    /// `∂/∂x` in the new variable: `(1/s) ∂` or `exp(-s x̂)/s ∂`.
    fn factor(&self, i: usize) -> Result<Expr> {
        Ok(match &self.maps[i] {
            AxisMap::Identity => Expr::one(),
            AxisMap::Scale(s) => s.recip()?,
            AxisMap::Exp(s) => expr::exp(&s.mul(&Expr::var(i)).neg()).div(s)?,
        })
    }

    /// Local chain-rule expression of `∂^J u` in the new variables.
    fn chain(&self, dep: usize, orders: &[u32]) -> Result<Expr> {
        let mut e = Expr::jet(Jet::new(dep, vec![0; orders.len()]));
        for (i, &k) in orders.iter().enumerate() {
            let f = self.factor(i)?;
            for _ in 0..k {
                e = f.mul(&e.total_derivative(i)?);
            }
        }
        Ok(e)
    }

    fn jet(&self, j: &Jet) -> Result<Expr> {
        let dim = j.orders.len();
        let schwarz = j.conj && self.rule == ConjRule::Schwarz;
        let mut mask = 0u32;
        let mut shift = vec![Expr::zero(); dim];
        for i in 0..dim {
            let reflected = j.mask >> i & 1 == 1;
            let own = j.shift.get(i).cloned().unwrap_or_else(Expr::zero);
            // the old point is ±x + σ; `s` is conjugated for the Schwarz reading
            let (s, flip) = match &self.maps[i] {
                AxisMap::Identity => (None, false),
                AxisMap::Scale(s) | AxisMap::Exp(s) => {
                    let flip = if !schwarz || is_real(s) {
                        false
                    } else if is_imaginary(s) {
                        true
                    } else {
                        return Err(DdeError::Unsupported(
                            "the Schwarz reading needs a real or imaginary scale".into(),
                        ));
                    };
                    (Some(if schwarz { s.conjugate() } else { s.clone() }), flip)
                }
            };
            match (&self.maps[i], s) {
                (AxisMap::Identity, _) => {
                    if reflected {
                        mask |= 1 << i;
                    }
                    shift[i] = own;
                }
                (AxisMap::Scale(_), Some(s)) => {
                    if reflected != flip {
                        mask |= 1 << i;
                    }
                    shift[i] = own.div(&s)?;
                }
                (AxisMap::Exp(_), Some(s)) => {
                    if !own.is_zero() {
                        return Err(DdeError::Unsupported("exponential map of an already shifted jet".into()));
                    }
                    if flip {
                        mask |= 1 << i;
                    }
                    if reflected {
                        // -exp(s x̂) = exp(s x̂ + iπ)
                        shift[i] = Expr::i().mul(&Expr::pi()).div(&s)?;
                    }
                }
                _ => unreachable!(),
            }
        }
        let local = self.chain(j.dep, &j.orders)?;
        let target = Jet { dep: j.dep, orders: vec![0; dim], mask, conj: j.conj, shift: expr_shift(shift) };
        Ok(if j.conj && !schwarz {
            mark_conj(&local)?.transform_point(target.mask, &target.shift)
        } else {
            local.to_family_of(&target)
        })
    }

    fn apply(&self, e: &Expr) -> Result<Expr, ExprError> {
        e.map_atoms(&mut |a| match a {
            Atom::Var(i) => Ok(self.var(*i)),
            Atom::Jet(j) => self.jet(j).map_err(|e| match e {
                DdeError::Expr(x) => x,
                other => ExprError::Unsupported(other.to_string()),
            }),
            other => rebuild_atom(other, &mut |x| self.apply(x)),
        })
    }
}

fn expr_shift(shift: Vec<Expr>) -> Vec<Expr> {
    if shift.iter().all(|s| s.is_zero()) {
        Vec::new()
    } else {
        shift
    }
}

/// Sets the conjugation flag on every jet without touching coefficients.
fn mark_conj(e: &Expr) -> Result<Expr> {
    Ok(e.map_atoms(&mut |a| match a {
        Atom::Jet(j) => Ok(Expr::jet(Jet { conj: true, ..j.clone() })),
        other => Ok(Expr::from_atom(other.clone())),
    })?)
}

/// Applies per-axis variable maps to an expression.
pub fn transform_expr(e: &Expr, maps: &[AxisMap], rule: ConjRule) -> Result<Expr> {
    let t = Transform { maps, rule };
    t.check()?;
    Ok(t.apply(e)?)
}

/// Applies per-axis variable maps to every equation of `sys`, keeping the
/// leading-derivative declarations that still solve.
pub fn transform_system(sys: &EquationSystem, maps: &[AxisMap], rule: ConjRule) -> Result<EquationSystem> {
    if maps.len() != sys.scope.dim() {
        return Err(DdeError::Unsupported(format!("expected {} axis maps, got {}", sys.scope.dim(), maps.len())));
    }
    let equations = sys
        .equations
        .iter()
        .map(|e| Ok(Equation { name: e.name.clone(), expr: transform_expr(&e.expr, maps, rule)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut out = EquationSystem::new(sys.scope.clone(), equations)?;
    for l in &sys.leading {
        // kept only where the image is still linear in the same jet
        let _ = out.solve_for(l.jet.clone(), &sys.equations[l.equation].name);
    }
    Ok(out)
}

fn axis_set(maps_len: usize, axes: &[usize]) -> Result<()> {
    match axes.iter().find(|&&a| a >= maps_len) {
        Some(a) => Err(DdeError::Unsupported(format!("axis {a} outside the {maps_len} variables"))),
        None => Ok(()),
    }
}

/// `x = exp(x̂)` on the given axes.
pub fn exp_substitute(sys: &EquationSystem, axes: &[usize]) -> Result<EquationSystem> {
    let dim = sys.scope.dim();
    axis_set(dim, axes)?;
    let maps: Vec<AxisMap> =
        (0..dim).map(|i| if axes.contains(&i) { AxisMap::Exp(Expr::one()) } else { AxisMap::Identity }).collect();
    transform_system(sys, &maps, ConjRule::Formal)
}

/// `x = s·x̂` per axis; `None` leaves the axis alone.
pub fn rescale(sys: &EquationSystem, scales: &[Option<Expr>], rule: ConjRule) -> Result<EquationSystem> {
    let maps: Vec<AxisMap> = scales.iter().map(|s| s.clone().map_or(AxisMap::Identity, AxisMap::Scale)).collect();
    transform_system(sys, &maps, rule)
}

/// The exponential map on the single axis of a reduced ODE, with the
/// common exponential factor divided out.
pub fn traveling_dde(ode: &ReducedOde) -> Result<ReducedOde> {
    if ode.scope.dim() != 1 {
        return Err(DdeError::Unsupported("expected an ODE".into()));
    }
    if ode.expr.jets().iter().any(|j| j.has_shift()) {
        return Err(DdeError::Unsupported("the ODE already has shifted arguments".into()));
    }
    let e = transform_expr(&ode.expr, &[AxisMap::Exp(Expr::one())], ConjRule::Formal)?;
    Ok(ReducedOde::new(ode.scope.clone(), normalize(&e)?))
}

/// Divides out exponential and parameter factors, then fixes the overall
/// constant so that the term with the highest derivative has coefficient 1.
pub fn normalize(e: &Expr) -> Result<Expr> {
    let e = strip_nonvanishing(e)?;
    let top = e
        .terms()
        .max_by_key(|(m, _)| m.atoms().filter_map(|(a, _)| a.as_jet()).map(|j| j.order()).max().unwrap_or(0))
        .map(|(_, c)| c.clone());
    Ok(match top.and_then(|c| c.recip()) {
        Some(r) => e.scale(&r),
        None => e,
    })
}

/// `iπ` as a scale factor.
pub fn i_pi() -> Expr {
    Expr::constant(GaussRat::i()).mul(&Expr::pi())
}

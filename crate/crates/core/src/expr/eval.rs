//! Floating-point evaluation of canonical expressions.

use std::collections::HashMap;

use num_complex::Complex64;

use super::{Atom, Expr, ExprError, Func, Jet, Result};
use crate::numeric::elliptic;

/// Supplies numeric values for leaf atoms. Composite atoms are evaluated
/// recursively; `Pi` never reaches the assignment.
pub trait Assignment {
    fn var(&self, axis: usize) -> Option<Complex64>;
    fn param(&self, name: &str) -> Option<Complex64>;
    /// Value of a jet coordinate. Reflected, shifted and conjugated families
    /// are resolved by the caller.
    fn jet(&self, jet: &Jet) -> Option<Complex64>;
}

/// A table-backed [`Assignment`]. Conjugated jets that are missing fall back
/// to the numeric conjugate of the unconjugated entry.
#[derive(Clone, Debug, Default)]
pub struct MapAssignment {
    pub vars: Vec<Complex64>,
    pub params: HashMap<String, Complex64>,
    pub jets: HashMap<Jet, Complex64>,
}

impl MapAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_var(mut self, axis: usize, v: impl Into<Complex64>) -> Self {
        if self.vars.len() <= axis {
            self.vars.resize(axis + 1, Complex64::new(f64::NAN, f64::NAN));
        }
        self.vars[axis] = v.into();
        self
    }

    pub fn with_param(mut self, name: &str, v: impl Into<Complex64>) -> Self {
        self.params.insert(name.to_string(), v.into());
        self
    }

    pub fn with_jet(mut self, jet: Jet, v: impl Into<Complex64>) -> Self {
        self.jets.insert(jet, v.into());
        self
    }
}

impl Assignment for MapAssignment {
    fn var(&self, axis: usize) -> Option<Complex64> {
        self.vars.get(axis).copied().filter(|v| !v.re.is_nan())
    }

    fn param(&self, name: &str) -> Option<Complex64> {
        self.params.get(name).copied()
    }

    fn jet(&self, jet: &Jet) -> Option<Complex64> {
        if let Some(v) = self.jets.get(jet) {
            return Some(*v);
        }
        if jet.conj {
            return self.jets.get(&jet.clone().with_conj(false)).map(|v| v.conj());
        }
        None
    }
}

pub fn eval_numeric(e: &Expr, env: &dyn Assignment) -> Result<Complex64> {
    let mut total = Complex64::new(0.0, 0.0);
    for (m, c) in e.terms() {
        let mut t = c.to_complex();
        for (a, k) in m.atoms() {
            let v = eval_atom(a, env)?;
            t *= v.powi(*k);
        }
        total += t;
    }
    Ok(total)
}

fn eval_atom(a: &Atom, env: &dyn Assignment) -> Result<Complex64> {
    match a {
        Atom::Pi => Ok(Complex64::new(std::f64::consts::PI, 0.0)),
        Atom::Var(i) => env.var(*i).ok_or_else(|| ExprError::Unbound(format!("variable #{i}"))),
        Atom::Param(p) => env.param(p).ok_or_else(|| ExprError::Unbound(p.to_string())),
        Atom::Jet(j) => env.jet(j).ok_or_else(|| ExprError::Unbound(format!("{j:?}"))),
        Atom::Sum(s) => eval_numeric(s, env),
        Atom::Root(n, arg) => {
            let z = eval_numeric(arg, env)?;
            Ok(match n {
                2 => z.sqrt(),
                _ => odd_cbrt(z),
            })
        }
        Atom::Func(f, args) => {
            let z = eval_numeric(&args[0], env)?;
            Ok(match f {
                Func::Exp => z.exp(),
                Func::Log => z.ln(),
                Func::Sin => z.sin(),
                Func::Cos => z.cos(),
                Func::Tanh => z.tanh(),
                Func::Sech => z.cosh().inv(),
                Func::Abs => Complex64::new(z.norm(), 0.0),
                Func::Sn | Func::Cn | Func::Dn => {
                    let m = eval_numeric(&args[1], env)?;
                    if m.im.abs() > 1e-12 * (1.0 + m.re.abs()) {
                        return Err(ExprError::Unsupported("complex elliptic modulus".into()));
                    }
                    let (sn, cn, dn) = elliptic::jacobi_complex(z, m.re);
                    match f {
                        Func::Sn => sn,
                        Func::Cn => cn,
                        _ => dn,
                    }
                }
            })
        }
    }
}

/// Real cube root extended as an odd function: the principal branch on the
/// right half-plane, `-cbrt(-z)` on the left.
pub(crate) fn odd_cbrt(z: Complex64) -> Complex64 {
    if z.re < 0.0 {
        -(-z).cbrt()
    } else {
        z.cbrt()
    }
}

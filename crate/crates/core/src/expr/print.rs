//! Plain-text printing in the input language, so printed expressions parse back.

use std::fmt::{self, Write};

use super::{Atom, Expr, Jet, Monomial};
use crate::coeff::GaussRat;

/// Names of base variables and dependent variables.
pub trait Names {
    fn var_name(&self, axis: usize) -> String;
    fn dep_name(&self, dep: usize) -> String;
}

/// Fallback naming `x0, x1, …` and `u0, u1, …`.
pub struct NoNames;

impl Names for NoNames {
    fn var_name(&self, axis: usize) -> String {
        format!("x{axis}")
    }
    fn dep_name(&self, dep: usize) -> String {
        format!("u{dep}")
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a dyn Names,
}

impl Expr {
    pub fn display<'a>(&'a self, names: &'a dyn Names) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }

    pub fn to_text(&self, names: &dyn Names) -> String {
        self.display(names).to_string()
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print_expr(self.expr, self.names))
    }
}

fn print_expr(e: &Expr, n: &dyn Names) -> String {
    if e.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (idx, (m, c)) in e.terms().enumerate() {
        let neg = c.is_negative();
        let c = if neg { -c.clone() } else { c.clone() };
        match (idx, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&print_term(&c, m, n));
    }
    out
}

fn print_term(c: &GaussRat, m: &Monomial, n: &dyn Names) -> String {
    let factors: Vec<String> = m.atoms().map(|(a, k)| print_power(a, *k, n)).collect();
    if factors.is_empty() {
        return c.to_string();
    }
    let body = factors.join("*");
    if c.is_one() {
        body
    } else {
        format!("{c}*{body}")
    }
}

fn print_power(a: &Atom, k: i32, n: &dyn Names) -> String {
    let base = print_atom(a, n);
    match k {
        1 => base,
        k if k > 0 => format!("{base}^{k}"),
        k => format!("{base}^({k})"),
    }
}

fn print_atom(a: &Atom, n: &dyn Names) -> String {
    match a {
        Atom::Pi => "pi".into(),
        Atom::Param(p) => p.to_string(),
        Atom::Var(i) => n.var_name(*i),
        Atom::Jet(j) => print_jet(j, n),
        Atom::Root(2, arg) => format!("sqrt({})", print_expr(arg, n)),
        Atom::Root(_, arg) => format!("cbrt({})", print_expr(arg, n)),
        Atom::Func(f, args) => {
            let args: Vec<String> = args.iter().map(|e| print_expr(e, n)).collect();
            format!("{}({})", f.name(), args.join(", "))
        }
        Atom::Sum(s) => format!("({})", print_expr(s, n)),
    }
}

pub(crate) fn print_jet(j: &Jet, n: &dyn Names) -> String {
    let dep = n.dep_name(j.dep);
    let mut s = if j.order() == 0 {
        dep
    } else {
        let mut d = format!("D[{dep}");
        for (axis, &k) in j.orders.iter().enumerate() {
            for _ in 0..k {
                write!(d, ",{}", n.var_name(axis)).unwrap();
            }
        }
        d.push(']');
        d
    };
    // conjugation applies to the function, the point follows
    if j.conj {
        s = format!("conj({s})");
    }
    if j.mask != 0 || j.has_shift() {
        let dim = j.orders.len();
        let args: Vec<String> = (0..dim)
            .map(|axis| {
                let v = Expr::var(axis);
                let v = if j.mask >> axis & 1 == 1 { v.neg() } else { v };
                let shift = j.shift.get(axis).cloned().unwrap_or_else(Expr::zero);
                print_expr(&v.add(&shift), n)
            })
            .collect();
        write!(s, "@({})", args.join(", ")).unwrap();
    }
    s
}

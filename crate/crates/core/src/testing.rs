//! Random expressions and generators for property tests.
//!
//! [`Tree`] is an uncanonicalized expression with its own numeric evaluator
//! and DSL printer, so canonical forms can be checked against something that
//! does not share their code.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::expr::print::Names;
use crate::expr::{func, Expr, Func, Jet};
use crate::scope::Scope;
use crate::symmetry::Generator;
use crate::GaussRat;

pub const PARAMS: [&str; 2] = ["a", "b"];

#[derive(Clone, Debug)]
pub enum Tree {
    /// `(re + i·im) / den`
    Num(i64, i64, i64),
    Var(usize),
    Param(usize),
    Pi,
    Jet(Jet),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, i32),
    /// `1 / (2 + t²)`
    Damp(Box<Tree>),
    Apply(Func, Box<Tree>),
}

/// Values for every leaf of a tree.
#[derive(Clone, Debug, Default)]
pub struct Point {
    pub vars: Vec<Complex64>,
    pub params: HashMap<String, Complex64>,
    pub jets: HashMap<Jet, Complex64>,
}

impl Point {
    pub fn env(&self) -> crate::expr::MapAssignment {
        let mut env = crate::expr::MapAssignment::new();
        for (i, v) in self.vars.iter().enumerate() {
            env = env.with_var(i, *v);
        }
        env.params = self.params.clone();
        env.jets = self.jets.clone();
        env
    }
}

fn small(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

impl Tree {
    pub fn to_expr(&self) -> Expr {
        match self {
            Tree::Num(re, im, den) => {
                Expr::int(*re).add(&Expr::i().mul(&Expr::int(*im))).scale(&GaussRat::ratio(1, *den))
            },
            Tree::Var(i) => Expr::var(*i),
            Tree::Param(p) => Expr::param(PARAMS[*p]),
            Tree::Pi => Expr::pi(),
            Tree::Jet(j) => Expr::jet(j.clone()),
            Tree::Add(a, b) => a.to_expr().add(&b.to_expr()),
            Tree::Sub(a, b) => a.to_expr().sub(&b.to_expr()),
            Tree::Mul(a, b) => a.to_expr().mul(&b.to_expr()),
            Tree::Pow(a, k) => a.to_expr().pow(*k).expect("nonnegative power"),
            Tree::Damp(a) => {
                let t = a.to_expr();
                Expr::int(2).add(&t.mul(&t)).recip().expect("nonzero denominator")
            }
            Tree::Apply(f, a) => func(*f, vec![a.to_expr()]).expect("unary function"),
        }
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        match self {
            Tree::Num(re, im, den) => Complex64::new(*re as f64, *im as f64) / *den as f64,
            Tree::Var(i) => p.vars[*i],
            Tree::Param(k) => p.params[PARAMS[*k]],
            Tree::Pi => Complex64::from(std::f64::consts::PI),
            Tree::Jet(j) => p.jets[j],
            Tree::Add(a, b) => a.eval(p) + b.eval(p),
            Tree::Sub(a, b) => a.eval(p) - b.eval(p),
            Tree::Mul(a, b) => a.eval(p) * b.eval(p),
            Tree::Pow(a, k) => a.eval(p).powi(*k),
            Tree::Damp(a) => {
                let t = a.eval(p);
                1.0 / (2.0 + t * t)
            }
            Tree::Apply(f, a) => {
                let t = a.eval(p);
                match f {
                    Func::Exp => t.exp(),
                    Func::Sin => t.sin(),
                    Func::Cos => t.cos(),
                    _ => unreachable!("not generated"),
                }
            }
        }
    }

    /// DSL source text, fully parenthesized.
    pub fn text(&self, scope: &Scope) -> String {
        match self {
            Tree::Num(re, im, den) => format!("(({re} + {im}*i)/{den})"),
            Tree::Var(i) => scope.var_name(*i),
            Tree::Param(k) => PARAMS[*k].to_string(),
            Tree::Pi => "pi".into(),
            Tree::Jet(j) => format!("({})", Expr::jet(j.clone()).to_text(scope)),
            Tree::Add(a, b) => format!("({} + {})", a.text(scope), b.text(scope)),
            Tree::Sub(a, b) => format!("({} - {})", a.text(scope), b.text(scope)),
            Tree::Mul(a, b) => format!("({} * {})", a.text(scope), b.text(scope)),
            Tree::Pow(a, k) => format!("({})^{k}", a.text(scope)),
            Tree::Damp(a) => format!("1/(2 + ({})^2)", a.text(scope)),
            Tree::Apply(f, a) => format!("{}({})", f.name(), a.text(scope)),
        }
    }

    pub fn jets(&self, out: &mut Vec<Jet>) {
        match self {
            Tree::Jet(j) => out.push(j.clone()),
            Tree::Add(a, b) | Tree::Sub(a, b) | Tree::Mul(a, b) => {
                a.jets(out);
                b.jets(out);
            }
            Tree::Pow(a, _) | Tree::Damp(a) | Tree::Apply(_, a) => a.jets(out),
            _ => {}
        }
    }
}

pub fn random_jet(rng: &mut ChaCha8Rng, scope: &Scope, max_order: u32) -> Jet {
    let dim = scope.dim();
    let orders = (0..dim).map(|_| rng.gen_range(0..=max_order)).collect();
    Jet::new(rng.gen_range(0..scope.deps.len()), orders)
        .with_mask(rng.gen_range(0..1u32 << dim))
        .with_conj(scope.complex && rng.gen_bool(0.5))
}

/// A random tree of the given depth. Leaves are small Gaussian rationals,
/// variables, parameters, `pi` and jets up to order 2.
pub fn random_tree(rng: &mut ChaCha8Rng, scope: &Scope, depth: u32) -> Tree {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..10) {
            0..=1 => Tree::Num(rng.gen_range(-4..=4), rng.gen_range(-2..=2), rng.gen_range(1..=3)),
            2..=3 => Tree::Var(rng.gen_range(0..scope.dim())),
            4 => Tree::Param(rng.gen_range(0..PARAMS.len())),
            5 => Tree::Pi,
            _ => Tree::Jet(random_jet(rng, scope, 2)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| Box::new(random_tree(rng, scope, depth - 1));
    match rng.gen_range(0..10) {
        0..=2 => Tree::Add(sub(rng), sub(rng)),
        3 => Tree::Sub(sub(rng), sub(rng)),
        4..=6 => Tree::Mul(sub(rng), sub(rng)),
        7 => {
            let k = rng.gen_range(0..=3);
            Tree::Pow(sub(rng), k)
        }
        8 => Tree::Damp(sub(rng)),
        _ => {
            let f = [Func::Exp, Func::Sin, Func::Cos][rng.gen_range(0..3)];
            Tree::Apply(f, sub(rng))
        }
    }
}

pub fn random_expr(rng: &mut ChaCha8Rng, scope: &Scope, depth: u32) -> Expr {
    random_tree(rng, scope, depth).to_expr()
}

/// A random point for `jets`: variables and parameters near the real axis,
/// jet values in the unit square.
pub fn random_point(rng: &mut ChaCha8Rng, scope: &Scope, jets: &[Jet]) -> Point {
    let vars = (0..scope.dim()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-0.3..0.3))).collect();
    let params = PARAMS.iter().map(|p| (p.to_string(), small(rng, 1.0))).collect();
    let jets = jets.iter().map(|j| (j.clone(), small(rng, 1.0))).collect();
    Point { vars, params, jets }
}

/// A random polynomial in the variables and local base jets, as used for
/// generator components.
pub fn random_polynomial(rng: &mut ChaCha8Rng, scope: &Scope, terms: usize) -> Expr {
    let mut atoms: Vec<Expr> = (0..scope.dim()).map(Expr::var).collect();
    atoms.extend((0..scope.deps.len()).map(|d| Expr::jet(Jet::base(d, scope.dim()))));
    atoms.push(Expr::param(PARAMS[0]));
    (0..terms)
        .map(|_| {
            let c = Expr::constant(GaussRat::ratio(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
            (0..rng.gen_range(0..=2)).fold(c, |m, _| m.mul(&atoms[rng.gen_range(0..atoms.len())]))
        })
        .sum()
}

pub fn random_generator(rng: &mut ChaCha8Rng, scope: &Scope) -> Generator {
    let xi = (0..scope.dim()).map(|_| random_polynomial(rng, scope, 3)).collect();
    let phi = (0..scope.deps.len()).map(|_| random_polynomial(rng, scope, 3)).collect();
    Generator::new(xi, phi)
}

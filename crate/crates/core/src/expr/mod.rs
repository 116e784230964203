//! Canonical symbolic expressions over jet coordinates.
//!
//! An [`Expr`] is always stored in canonical form: a finite sum of terms
//! `c · a₁^k₁ ⋯ a_r^k_r` where `c` is a nonzero Gaussian rational and the
//! `aⱼ` are [`Atom`]s sorted by a fixed total order with nonzero integer
//! exponents. Products of sums are expanded, so two expressions that are
//! equal as Laurent polynomials in their atoms are structurally identical.
//!
//! Extra normal-form rules keep atoms unique:
//! * at most one `exp` atom per term, always with exponent 1
//!   (`exp(a)·exp(b) = exp(a+b)`, `exp(0) = 1`, `exp(k·iπ/2)` folded into the
//!   coefficient);
//! * a root atom `root(n, A)` carries an exponent in `1..n`, higher powers are
//!   folded back into `A`;
//! * a multi-term sum appears as an atom only under a negative exponent and
//!   with a leading coefficient of 1;
//! * odd/even function symmetries pull a negative sign out of the argument.
//!
//! The four jet families `q`, `conj q`, `q@(-x,t)`, `conj q@(-x,t)` are
//! distinct atoms and are treated as algebraically independent.

mod build;
mod eval;
mod ops;
pub mod print;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::coeff::GaussRat;

pub use build::{cbrt, exp, func, root, sqrt};
pub use eval::{eval_numeric, Assignment, MapAssignment};
pub use ops::{Bindings, BindingKey};
pub(crate) use ops::rebuild_atom;
pub use print::ExprDisplay;

pub type Symbol = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-integer power of a non-atomic expression")]
    NonIntegerPower,
    #[error("function `{name}` expects {expected} argument(s), got {got}")]
    Arity { name: &'static str, expected: usize, got: usize },
    #[error("unbound symbol `{0}` in numeric evaluation")]
    Unbound(String),
    #[error("cyclic substitution binding involving `{0}`")]
    CyclicBinding(String),
    #[error("axis {axis} is outside the {dim}-dimensional base space")]
    AxisOutOfRange { axis: usize, dim: usize },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T, E = ExprError> = std::result::Result<T, E>;

/// Elementary functions admitted in expressions. `Cn`, `Dn` and `Tanh`
/// close the set under differentiation of `Sn` and `Sech`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tanh,
    Sech,
    Sn,
    Cn,
    Dn,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tanh => "tanh",
            Func::Sech => "sech",
            Func::Sn => "sn",
            Func::Cn => "cn",
            Func::Dn => "dn",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tanh" => Func::Tanh,
            "sech" => Func::Sech,
            "sn" => Func::Sn,
            "cn" => Func::Cn,
            "dn" => Func::Dn,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Sn | Func::Cn | Func::Dn => 2,
            _ => 1,
        }
    }
}

/// A jet coordinate `u^α_J` evaluated at the point `R(x) + s`, where `R`
/// negates the axes in `mask` and `s` is an optional constant shift per axis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Jet {
    pub dep: usize,
    pub orders: Vec<u32>,
    pub mask: u32,
    pub conj: bool,
    /// Empty, or one constant per axis (zero for unshifted axes).
    pub shift: Vec<Expr>,
}

impl Jet {
    pub fn new(dep: usize, orders: Vec<u32>) -> Self {
        Jet { dep, orders, mask: 0, conj: false, shift: Vec::new() }
    }

    pub fn base(dep: usize, dim: usize) -> Self {
        Jet::new(dep, vec![0; dim])
    }

    pub fn order(&self) -> u32 {
        self.orders.iter().sum()
    }

    pub fn is_local(&self) -> bool {
        self.mask == 0 && !self.conj && !self.has_shift()
    }

    pub fn has_shift(&self) -> bool {
        self.shift.iter().any(|s| !s.is_zero())
    }

    pub fn with_mask(mut self, mask: u32) -> Self {
        self.mask = mask;
        self
    }

    pub fn with_conj(mut self, conj: bool) -> Self {
        self.conj = conj;
        self
    }

    /// The same family (mask, conjugation, shift) at a different multi-index.
    pub fn with_orders(&self, orders: Vec<u32>) -> Self {
        Jet { orders, ..self.clone() }
    }

    /// Strips mask, conjugation and shift.
    pub fn local(&self) -> Self {
        Jet::new(self.dep, self.orders.clone())
    }

    pub fn family(&self) -> (usize, u32, bool) {
        (self.dep, self.mask, self.conj)
    }

    pub fn increment(&self, axis: usize) -> Self {
        let mut orders = self.orders.clone();
        orders[axis] += 1;
        self.with_orders(orders)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    Pi,
    Param(Symbol),
    Var(usize),
    Jet(Jet),
    /// Principal `n`-th root (`n = 2`) or odd real root (`n = 3`).
    Root(u32, Expr),
    Func(Func, Vec<Expr>),
    /// A multi-term sum; only ever carries a negative exponent.
    Sum(Expr),
}

impl Atom {
    pub fn is_leaf(&self) -> bool {
        matches!(self, Atom::Pi | Atom::Param(_) | Atom::Var(_) | Atom::Jet(_))
    }

    pub fn as_jet(&self) -> Option<&Jet> {
        match self {
            Atom::Jet(j) => Some(j),
            _ => None,
        }
    }

    /// Child expressions of composite atoms.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Atom::Root(_, e) | Atom::Sum(e) => vec![e],
            Atom::Func(_, args) => args.iter().collect(),
            Atom::Jet(j) => j.shift.iter().collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Monomial(pub Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &(Atom, i32)> {
        self.0.iter()
    }

    pub fn exponent_of(&self, atom: &Atom) -> i32 {
        self.0
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    fn merge(&self, other: &Monomial, sign: i32) -> Vec<(Atom, i32)> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((b[j].0.clone(), sign * b[j].1));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let k = a[i].1 + sign * b[j].1;
                    if k != 0 {
                        out.push((a[i].0.clone(), k));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend(b[j..].iter().map(|(at, k)| (at.clone(), sign * k)));
        out
    }
}

type Terms = BTreeMap<Monomial, GaussRat>;

/// An immutable canonical expression; cloning is cheap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expr(Arc<Terms>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&print::NoNames))
    }
}

impl Default for Expr {
    fn default() -> Self {
        Expr::zero()
    }
}

impl Expr {
    fn from_terms(terms: Terms) -> Expr {
        Expr(Arc::new(terms))
    }

    pub fn zero() -> Expr {
        Expr::from_terms(Terms::new())
    }

    pub fn one() -> Expr {
        Expr::constant(GaussRat::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::constant(GaussRat::int(n))
    }

    pub fn ratio(n: i64, d: i64) -> Expr {
        Expr::constant(GaussRat::ratio(n, d))
    }

    pub fn i() -> Expr {
        Expr::constant(GaussRat::i())
    }

    pub fn constant(c: GaussRat) -> Expr {
        let mut t = Terms::new();
        if !c.is_zero() {
            t.insert(Monomial::one(), c);
        }
        Expr::from_terms(t)
    }

    /// Wraps an atom that is already in canonical form.
    pub fn from_atom(atom: Atom) -> Expr {
        Expr::term(GaussRat::one(), Monomial(vec![(atom, 1)]))
    }

    /// Wraps a leaf atom (`Pi`, `Param`, `Var`, `Jet`).
    pub fn leaf(atom: Atom) -> Expr {
        debug_assert!(atom.is_leaf());
        let mut t = Terms::new();
        t.insert(Monomial(vec![(atom, 1)]), GaussRat::one());
        Expr::from_terms(t)
    }

    pub fn pi() -> Expr {
        Expr::leaf(Atom::Pi)
    }

    pub fn var(axis: usize) -> Expr {
        Expr::leaf(Atom::Var(axis))
    }

    pub fn param(name: &str) -> Expr {
        Expr::leaf(Atom::Param(Symbol::from(name)))
    }

    pub fn jet(jet: Jet) -> Expr {
        Expr::leaf(Atom::Jet(jet))
    }

    /// A single canonical term. The monomial must already be normalized.
    pub fn term(coeff: GaussRat, mono: Monomial) -> Expr {
        let mut t = Terms::new();
        if !coeff.is_zero() {
            t.insert(mono, coeff);
        }
        Expr::from_terms(t)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussRat)> + '_ {
        self.0.iter()
    }

    pub fn as_constant(&self) -> Option<GaussRat> {
        match self.0.len() {
            0 => Some(GaussRat::zero()),
            1 => {
                let (m, c) = self.0.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The single term of a one-term expression.
    pub fn as_term(&self) -> Option<(&Monomial, &GaussRat)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    pub fn as_leaf(&self) -> Option<&Atom> {
        let (m, c) = self.as_term()?;
        match m.0.as_slice() {
            [(a, 1)] if c.is_one() => Some(a),
            _ => None,
        }
    }

    pub fn leading_coeff(&self) -> Option<&GaussRat> {
        self.0.values().next()
    }

    fn accumulate(acc: &mut Terms, mono: Monomial, c: GaussRat) {
        use std::collections::btree_map::Entry;
        match acc.entry(mono) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn accumulate_expr(acc: &mut Terms, e: &Expr, scale: &GaussRat) {
        for (m, c) in e.terms() {
            Expr::accumulate(acc, m.clone(), scale * c);
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (big, small) = if self.len() >= other.len() { (self, other) } else { (other, self) };
        let mut acc = (*big.0).clone();
        for (m, c) in small.terms() {
            Expr::accumulate(&mut acc, m.clone(), c.clone());
        }
        Expr::from_terms(acc)
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Expr {
        self.scale(&GaussRat::int(-1))
    }

    pub fn scale(&self, c: &GaussRat) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr::from_terms(self.terms().map(|(m, k)| (m.clone(), c * k)).collect())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        let mut acc = Terms::new();
        for (m1, c1) in self.terms() {
            for (m2, c2) in other.terms() {
                let c = c1 * c2;
                let raw = m1.merge(m2, 1);
                if build::needs_normalizing(&raw) {
                    let e = build::normalize_monomial(raw);
                    Expr::accumulate_expr(&mut acc, &e, &c);
                } else {
                    Expr::accumulate(&mut acc, Monomial(raw), c);
                }
            }
        }
        let out = Expr::from_terms(acc);
        if self.has_sum_atom() || other.has_sum_atom() {
            out.cancel_sums()
        } else {
            out
        }
    }

    fn has_sum_atom(&self) -> bool {
        self.terms().any(|(m, _)| m.atoms().any(|(a, _)| matches!(a, Atom::Sum(_))))
    }

    /// Folds `r·S·S^k` back to `r·S^(k+1)` when all terms carrying `S^k`
    /// add up to a single term times `S`.
    fn cancel_sums(self) -> Expr {
        let mut e = self;
        'outer: loop {
            let sums: std::collections::BTreeSet<(Atom, i32)> = e
                .terms()
                .flat_map(|(m, _)| m.atoms().filter(|(a, _)| matches!(a, Atom::Sum(_))).cloned().collect::<Vec<_>>())
                .collect();
            for (atom, k) in sums {
                let Atom::Sum(s) = &atom else { unreachable!() };
                let mut group = Terms::new();
                let mut rest = Terms::new();
                for (m, c) in e.terms() {
                    if m.exponent_of(&atom) == k {
                        let stripped: Vec<(Atom, i32)> = m.0.iter().filter(|(a, _)| a != &atom).cloned().collect();
                        group.insert(Monomial(stripped), c.clone());
                    } else {
                        rest.insert(m.clone(), c.clone());
                    }
                }
                let p = Expr::from_terms(group);
                let (pm, pc) = p.terms().next().unwrap();
                let (sm, sc) = s.terms().next().unwrap();
                let ratio_mono = Monomial(pm.merge(sm, -1));
                if build::needs_normalizing(&ratio_mono.0) {
                    continue;
                }
                let r = Expr::term(pc / sc, ratio_mono);
                if r.mul(s) == p {
                    let power = if k + 1 == 0 {
                        Expr::one()
                    } else {
                        Expr::term(GaussRat::one(), Monomial(vec![(atom.clone(), k + 1)]))
                    };
                    let folded = r.mul(&power);
                    e = Expr::from_terms(rest).add(&folded);
                    continue 'outer;
                }
            }
            return e;
        }
    }


    /// Integer power. Negative powers of sums become [`Atom::Sum`] atoms.
    pub fn pow(&self, k: i32) -> Result<Expr> {
        if k == 0 {
            return Ok(Expr::one());
        }
        if k == 1 {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return if k > 0 { Ok(Expr::zero()) } else { Err(ExprError::DivisionByZero) };
        }
        if let Some((m, c)) = self.as_term() {
            let c = c.pow(k).ok_or(ExprError::DivisionByZero)?;
            let raw: Vec<(Atom, i32)> = m.0.iter().map(|(a, e)| (a.clone(), e * k)).collect();
            let e = if build::needs_normalizing(&raw) {
                build::normalize_monomial(raw)
            } else {
                Expr::term(GaussRat::one(), Monomial(raw))
            };
            return Ok(e.scale(&c));
        }
        if k > 0 {
            let mut acc = Expr::one();
            let mut sq = self.clone();
            let mut e = k as u32;
            while e > 0 {
                if e & 1 == 1 {
                    acc = acc.mul(&sq);
                }
                e >>= 1;
                if e > 0 {
                    sq = sq.mul(&sq);
                }
            }
            return Ok(acc);
        }
        // self = lead · S with S monic.
        let lead = self.leading_coeff().unwrap().clone();
        let inv = lead.recip().ok_or(ExprError::DivisionByZero)?;
        let monic = self.scale(&inv);
        let c = lead.pow(k).ok_or(ExprError::DivisionByZero)?;
        Ok(Expr::term(c, Monomial(vec![(Atom::Sum(monic), k)])))
    }

    pub fn recip(&self) -> Result<Expr> {
        self.pow(-1)
    }

    pub fn div(&self, other: &Expr) -> Result<Expr> {
        Ok(self.mul(&other.recip()?))
    }

    /// `true` when some atom (recursively, including inside composite atoms
    /// and shifts) satisfies `pred`.
    pub fn any_atom(&self, pred: &mut dyn FnMut(&Atom) -> bool) -> bool {
        self.terms().any(|(m, _)| {
            m.atoms().any(|(a, _)| pred(a) || a.children().into_iter().any(|c| c.any_atom(pred)))
        })
    }

    /// Collects every jet coordinate occurring anywhere in the expression.
    pub fn jets(&self) -> Vec<Jet> {
        let mut out = std::collections::BTreeSet::new();
        self.any_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                out.insert(j.clone());
            }
            false
        });
        out.into_iter().collect()
    }

    pub fn params(&self) -> Vec<Symbol> {
        let mut out = std::collections::BTreeSet::new();
        self.any_atom(&mut |a| {
            if let Atom::Param(p) = a {
                out.insert(p.clone());
            }
            false
        });
        out.into_iter().collect()
    }

    pub fn contains_var(&self, axis: usize) -> bool {
        self.any_atom(&mut |a| matches!(a, Atom::Var(i) if *i == axis))
    }

    pub fn contains_param(&self, name: &str) -> bool {
        self.any_atom(&mut |a| matches!(a, Atom::Param(p) if &**p == name))
    }

    pub fn contains_jets(&self) -> bool {
        self.any_atom(&mut |a| matches!(a, Atom::Jet(_)))
    }

    /// Real and imaginary coefficient parts, assuming every atom is real.
    pub fn split_re_im(&self) -> (Expr, Expr) {
        let re = self
            .terms()
            .map(|(m, c)| (m.clone(), GaussRat::real(c.re.clone())))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        let im = self
            .terms()
            .map(|(m, c)| (m.clone(), GaussRat::real(c.im.clone())))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        (Expr::from_terms(re), Expr::from_terms(im))
    }

    /// Rebuilds the expression from scratch through the normalizing
    /// constructors. Canonical inputs are returned unchanged.
    pub fn canonicalize(&self) -> Result<Expr> {
        self.map_atoms(&mut |a| ops::rebuild_atom(a, &mut |e| e.canonicalize()))
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<GaussRat> for Expr {
    fn from(c: GaussRat) -> Self {
        Expr::constant(c)
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $f:ident) => {
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(self, o)
            }
        }
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$f(&self, &o)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr {
                Expr::$f(&self, o)
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: Expr) -> Expr {
                Expr::$f(self, &o)
            }
        }
    };
}

bin_op!(Add, add, add);
bin_op!(Sub, sub, sub);
bin_op!(Mul, mul, mul);

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(&self)
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Terms::new();
        for e in iter {
            Expr::accumulate_expr(&mut acc, &e, &GaussRat::one());
        }
        Expr::from_terms(acc)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::one(), |a, b| a.mul(&b))
    }
}

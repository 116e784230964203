//! Parse trees and their lowering to canonical expressions.

use crate::coeff::GaussRat;
use crate::expr::{self, Atom, Expr, Func, Jet};
use crate::scope::Scope;

use super::{ParseError, SourceSpan};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Number(String),
    Ident(String),
    Str(String),
    Neg(Box<Tree>),
    Binary(BinOp, Box<Tree>, Box<Tree>),
    Power(Box<Tree>, Box<Tree>),
    Call(String, Vec<Tree>),
    /// `D[f, x, x, ...]`
    Deriv(Box<Tree>, Vec<(String, SourceSpan)>),
    /// `f@(a, b, ...)`
    At(Box<Tree>, Vec<Tree>),
    /// `lhs = rhs`, only at the top of an item value.
    Equation(Box<Tree>, Box<Tree>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub node: Node,
    pub span: SourceSpan,
}

impl Tree {
    pub fn new(node: Node, span: SourceSpan) -> Self {
        Tree { node, span }
    }

    pub fn as_ident(&self) -> Option<&str> {
        match &self.node {
            Node::Ident(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_equation(&self) -> Option<(&Tree, &Tree)> {
        match &self.node {
            Node::Equation(l, r) => Some((l, r)),
            _ => None,
        }
    }
}

pub const RESERVED: &[&str] = &["i", "pi", "D", "conj", "sqrt", "cbrt"];

fn err(msg: impl Into<String>, span: SourceSpan) -> ParseError {
    ParseError::new(msg, span)
}

/// Lowers a parse tree to a canonical expression. Identifiers that are not
/// declared variables become parameters.
pub fn canonicalize(tree: &Tree, scope: &Scope) -> Result<Expr, ParseError> {
    let span = tree.span;
    let wrap = |r: expr::Result<Expr>| r.map_err(|e| err(e.to_string(), span));
    match &tree.node {
        Node::Number(text) => GaussRat::from_decimal(text)
            .map(Expr::constant)
            .ok_or_else(|| err(format!("malformed number `{text}`"), span)),
        Node::Ident(name) => Ok(match name.as_str() {
            "i" => Expr::i(),
            "pi" => Expr::pi(),
            _ => {
                if let Some(axis) = scope.var_index(name) {
                    Expr::var(axis)
                } else if let Some(dep) = scope.dep_index(name) {
                    Expr::jet(Jet::base(dep, scope.dim()))
                } else if RESERVED.contains(&name.as_str()) || Func::from_name(name).is_some() {
                    return Err(err(format!("`{name}` is reserved"), span));
                } else {
                    Expr::param(name)
                }
            }
        }),
        Node::Str(_) => Err(err("a string is not an expression", span)),
        Node::Neg(a) => Ok(canonicalize(a, scope)?.neg()),
        Node::Binary(op, a, b) => {
            let (a, b) = (canonicalize(a, scope)?, canonicalize(b, scope)?);
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.sub(&b)),
                BinOp::Mul => Ok(a.mul(&b)),
                BinOp::Div => wrap(a.div(&b)),
            }
        }
        Node::Power(base, exponent) => {
            let b = canonicalize(base, scope)?;
            let k = canonicalize(exponent, scope)?;
            let k = k
                .as_constant()
                .filter(|c| c.is_real())
                .ok_or_else(|| err("exponent must be a rational constant", exponent.span))?;
            let (num, den) = (k.re.numer().clone(), k.re.denom().clone());
            let num: i32 = num.try_into().map_err(|_| err("exponent too large", exponent.span))?;
            let den: u32 = den.try_into().map_err(|_| err("exponent too large", exponent.span))?;
            match den {
                1 => wrap(b.pow(num)),
                2 | 3 => wrap(expr::root(den, &b).and_then(|r| r.pow(num))),
                _ => Err(err("fractional exponents are limited to halves and thirds", exponent.span)),
            }
        }
        Node::Call(name, args) => {
            let vals = args.iter().map(|a| canonicalize(a, scope)).collect::<Result<Vec<_>, _>>()?;
            let one = |vals: &[Expr]| {
                if vals.len() == 1 {
                    Ok(vals[0].clone())
                } else {
                    Err(err(format!("`{name}` takes one argument"), span))
                }
            };
            match name.as_str() {
                "conj" => Ok(one(&vals)?.conjugate()),
                "sqrt" => wrap(expr::sqrt(&one(&vals)?)),
                "cbrt" => wrap(expr::cbrt(&one(&vals)?)),
                _ => match Func::from_name(name) {
                    Some(f) => wrap(expr::func(f, vals)),
                    None => Err(err(format!("unknown function `{name}`"), span)),
                },
            }
        }
        Node::Deriv(f, axes) => {
            let mut e = canonicalize(f, scope)?;
            for (axis, sp) in axes {
                let i = scope.var_index(axis).ok_or_else(|| err(format!("unknown variable `{axis}`"), *sp))?;
                e = e.total_derivative(i).map_err(|x| err(x.to_string(), *sp))?;
            }
            Ok(e)
        }
        Node::At(f, args) => {
            let dim = scope.dim();
            if args.len() != dim {
                return Err(err(format!("expected {dim} argument(s) after `@`, got {}", args.len()), span));
            }
            let base = canonicalize(f, scope)?;
            let mut mask = 0u32;
            let mut shift = Vec::with_capacity(dim);
            for (axis, a) in args.iter().enumerate() {
                let v = canonicalize(a, scope)?;
                let slope = v
                    .partial(&Atom::Var(axis))
                    .map_err(|x| err(x.to_string(), a.span))?
                    .as_constant()
                    .filter(|c| c.is_one() || (-c.clone()).is_one());
                let Some(slope) = slope else {
                    return Err(err(format!("argument {} must be ±{} plus a constant", axis + 1, scope.vars[axis]), a.span));
                };
                let sign = if slope.is_one() { 1 } else { -1 };
                let s = v.sub(&Expr::var(axis).scale(&GaussRat::int(sign)));
                if (0..dim).any(|j| s.contains_var(j)) || s.contains_jets() {
                    return Err(err("argument shifts must be constant", a.span));
                }
                if sign < 0 {
                    mask |= 1 << axis;
                }
                shift.push(s);
            }
            // `transform_point` shifts after reflecting; `-x + s` is R(x) + s.
            Ok(base.transform_point(mask, &shift))
        }
        Node::Equation(..) => Err(err("unexpected `=`", span)),
    }
}

/// `lhs = rhs` lowered to `lhs - rhs`; a bare expression is taken as is.
pub fn canonicalize_equation(tree: &Tree, scope: &Scope) -> Result<Expr, ParseError> {
    match tree.as_equation() {
        Some((l, r)) => Ok(canonicalize(l, scope)?.sub(&canonicalize(r, scope)?)),
        None => canonicalize(tree, scope),
    }
}

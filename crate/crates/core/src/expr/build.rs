//! Normalizing constructors for composite atoms.

use num_traits::{Signed, Zero};

use super::{Atom, Expr, ExprError, Func, Monomial, Result};
use crate::coeff::GaussRat;

pub(super) fn needs_normalizing(raw: &[(Atom, i32)]) -> bool {
    let mut exps = 0;
    for (a, k) in raw {
        match a {
            Atom::Root(n, _) if *k < 1 || *k >= *n as i32 => return true,
            Atom::Func(Func::Exp, _) => {
                exps += 1;
                if *k != 1 || exps > 1 {
                    return true;
                }
            }
            Atom::Sum(_) if *k > 0 => return true,
            _ => {}
        }
    }
    false
}

/// Folds root powers, merges exponentials and expands positive powers of
/// sums. Input atoms are sorted with nonzero exponents.
pub(super) fn normalize_monomial(raw: Vec<(Atom, i32)>) -> Expr {
    let mut plain = Vec::with_capacity(raw.len());
    let mut factors: Vec<Expr> = Vec::new();
    let mut exp_arg = Expr::zero();
    let mut has_exp = false;
    for (a, k) in raw {
        match a {
            Atom::Root(n, arg) if k < 1 || k >= n as i32 => {
                let q = k.div_euclid(n as i32);
                let r = k.rem_euclid(n as i32);
                // arg is never zero, so the power exists
                factors.push(arg.pow(q).expect("nonzero root argument"));
                if r != 0 {
                    plain.push((Atom::Root(n, arg), r));
                }
            }
            Atom::Func(Func::Exp, args) => {
                has_exp = true;
                exp_arg = exp_arg.add(&args[0].scale(&GaussRat::int(k as i64)));
            }
            Atom::Sum(s) if k > 0 => {
                factors.push(s.pow(k).expect("positive power"));
            }
            other => plain.push((other, k)),
        }
    }
    let mut out = Expr::term(GaussRat::one(), Monomial(plain));
    if has_exp {
        out = out.mul(&exp(&exp_arg));
    }
    for f in factors {
        out = out.mul(&f);
    }
    out
}

/// `exp(arg)` with `exp(0) = 1` and `exp(r·iπ) = i^{2r}` for half-integer `r`.
pub fn exp(arg: &Expr) -> Expr {
    let mut rest = Vec::new();
    let mut unit = GaussRat::one();
    for (m, c) in arg.terms() {
        if let [(Atom::Pi, 1)] = m.0.as_slice() {
            if c.re.is_zero() {
                let twice = &c.im * num_rational::BigRational::from_integer(2.into());
                if twice.is_integer() {
                    let four = num_bigint::BigInt::from(4);
                    let k: num_bigint::BigInt = (twice.to_integer() % &four + &four) % &four;
                    let k: i32 = k.try_into().unwrap_or(0);
                    unit = &unit * &GaussRat::i().pow(k).unwrap();
                    continue;
                }
            }
        }
        rest.push(Expr::term(c.clone(), m.clone()));
    }
    let arg: Expr = rest.into_iter().sum();
    if arg.is_zero() {
        return Expr::constant(unit);
    }
    Expr::term(unit, Monomial(vec![(Atom::Func(Func::Exp, vec![arg]), 1)]))
}

/// Builds a function application in canonical form.
pub fn func(f: Func, args: Vec<Expr>) -> Result<Expr> {
    if args.len() != f.arity() {
        return Err(ExprError::Arity { name: f.name(), expected: f.arity(), got: args.len() });
    }
    if f == Func::Exp {
        return Ok(exp(&args[0]));
    }
    let u = &args[0];
    // degenerate moduli
    if let Some(m) = args.get(1).and_then(|m| m.as_constant()) {
        if m.is_zero() {
            return match f {
                Func::Sn => func(Func::Sin, vec![u.clone()]),
                Func::Cn => func(Func::Cos, vec![u.clone()]),
                Func::Dn => Ok(Expr::one()),
                _ => unreachable!(),
            };
        }
        if m.is_one() {
            return match f {
                Func::Sn => func(Func::Tanh, vec![u.clone()]),
                Func::Cn | Func::Dn => func(Func::Sech, vec![u.clone()]),
                _ => unreachable!(),
            };
        }
    }
    if u.is_zero() {
        return Ok(match f {
            Func::Sin | Func::Tanh | Func::Sn | Func::Abs => Expr::zero(),
            Func::Cos | Func::Sech | Func::Cn | Func::Dn => Expr::one(),
            Func::Log => return Err(ExprError::DivisionByZero),
            Func::Exp => unreachable!(),
        });
    }
    if f == Func::Log && u.is_one() {
        return Ok(Expr::zero());
    }
    if f == Func::Abs {
        if let Some(c) = u.as_constant() {
            if c.is_real() {
                return Ok(Expr::constant(GaussRat::real(c.re.abs())));
            }
        }
    }
    let negative = u.leading_coeff().is_some_and(|c| c.is_negative());
    let parity = match f {
        Func::Sin | Func::Tanh | Func::Sn => Some(-1),
        Func::Cos | Func::Sech | Func::Cn | Func::Dn | Func::Abs => Some(1),
        _ => None,
    };
    let mut args = args;
    let mut sign = 1;
    if let (true, Some(p)) = (negative, parity) {
        args[0] = args[0].neg();
        sign = p;
    }
    let e = Expr::term(GaussRat::int(sign), Monomial(vec![(Atom::Func(f, args), 1)]));
    Ok(e)
}

/// `n`-th root (`n ∈ {2, 3}`): principal square root, odd real cube root.
/// Positive real content is pulled out of the argument, and for odd `n`
/// the sign as well.
pub fn root(n: u32, arg: &Expr) -> Result<Expr> {
    if !(2..=3).contains(&n) {
        return Err(ExprError::Unsupported(format!("root of index {n}")));
    }
    if arg.is_zero() {
        return Ok(Expr::zero());
    }
    if let Some(c) = arg.as_constant() {
        return Ok(root_of_constant(n, &c));
    }
    let lead = arg.leading_coeff().unwrap().clone();
    let (content, negate) = if lead.is_real() {
        (GaussRat::real(lead.re.abs()), n % 2 == 1 && lead.re.is_negative())
    } else {
        (GaussRat::one(), false)
    };
    let divisor = if negate { -content.clone() } else { content.clone() };
    let rest = arg.scale(&divisor.recip().unwrap());
    let mut prefactor = root_of_constant(n, &content);
    if negate {
        prefactor = prefactor.neg();
    }
    let atom = Expr::term(GaussRat::one(), Monomial(vec![(Atom::Root(n, rest), 1)]));
    Ok(prefactor.mul(&atom))
}

fn root_of_constant(n: u32, c: &GaussRat) -> Expr {
    if let Some(r) = c.exact_root(n) {
        return Expr::constant(r);
    }
    if c.is_real() && c.re.is_negative() {
        let pos = GaussRat::real(-c.re.clone());
        let inner = Expr::term(GaussRat::one(), Monomial(vec![(Atom::Root(n, Expr::constant(pos)), 1)]));
        return if n % 2 == 1 { inner.neg() } else { inner.mul(&Expr::i()) };
    }
    Expr::term(GaussRat::one(), Monomial(vec![(Atom::Root(n, Expr::constant(c.clone())), 1)]))
}

pub fn sqrt(arg: &Expr) -> Result<Expr> {
    root(2, arg)
}

pub fn cbrt(arg: &Expr) -> Result<Expr> {
    root(3, arg)
}

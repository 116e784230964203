use std::collections::{BTreeMap, HashMap};

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;

use crate::coeff::GaussRat;
use crate::expr::{Atom, Bindings, Expr, Jet, Monomial, Symbol};
use crate::linalg;
use crate::system::EquationSystem;

use super::condition::{apply_linearized_condition, reduce_on_solutions};
use super::prolong::multi_indices;
use super::{Generator, Result, SymmetryError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Total degree of the polynomial coefficients in the base variables.
    pub degree: u32,
    /// Restricts vector-field coefficients to real numbers.
    pub real_fields: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { degree: 2, real_fields: false }
    }
}

/// A generator whose coefficients are linear in real unknown parameters.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub generator: Generator,
    pub unknowns: Vec<Symbol>,
}

/// One linear equation per collected monomial.
#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    /// `(equation index, monomial)` keys with their coefficient, a linear
    /// form in the unknowns.
    pub equations: Vec<((usize, Monomial), Expr)>,
    pub unknowns: Vec<Symbol>,
}

#[derive(Clone, Debug)]
pub struct Classification {
    pub basis: Vec<Generator>,
    /// Real dimension of the solution space of the determining system.
    pub dimension: usize,
    pub unknowns: usize,
    pub determining_equations: usize,
}

/// ξⁱ and the inhomogeneous part of φ are polynomials of total degree at most
/// `degree`; φ is additionally linear in the dependent variables (and their
/// conjugates for complex systems) with polynomial coefficients.
pub fn build_ansatz(sys: &EquationSystem, opts: ClassifyOptions) -> Ansatz {
    let dim = sys.scope.dim();
    let deps = sys.scope.deps.len();
    let complex_system = sys.is_complex();
    let complex_coeffs = complex_system && !opts.real_fields;
    let mut unknowns: Vec<Symbol> = Vec::new();
    let mut fresh = |unknowns: &mut Vec<Symbol>| -> Expr {
        let mut next = || {
            let s = Symbol::from(format!("κ{}", unknowns.len()));
            unknowns.push(s.clone());
            Expr::leaf(Atom::Param(s))
        };
        let re = next();
        if complex_coeffs {
            re.add(&next().mul(&Expr::i()))
        } else {
            re
        }
    };
    let monomials: Vec<Expr> = (0..=opts.degree)
        .flat_map(|k| multi_indices(dim, k))
        .map(|ix| {
            ix.iter()
                .enumerate()
                .map(|(axis, &p)| Expr::var(axis).pow(p as i32).unwrap())
                .product()
        })
        .collect();
    let poly = |unknowns: &mut Vec<Symbol>, fresh: &mut dyn FnMut(&mut Vec<Symbol>) -> Expr| -> Expr {
        monomials.iter().map(|m| fresh(unknowns).mul(m)).sum()
    };
    let mut xi = Vec::with_capacity(dim);
    for _ in 0..dim {
        xi.push(poly(&mut unknowns, &mut fresh));
    }
    let mut phi = Vec::with_capacity(deps);
    for _ in 0..deps {
        let mut p = poly(&mut unknowns, &mut fresh);
        for beta in 0..deps {
            let u = Expr::jet(Jet::base(beta, dim));
            p = p.add(&poly(&mut unknowns, &mut fresh).mul(&u));
            if complex_system {
                p = p.add(&poly(&mut unknowns, &mut fresh).mul(&u.conjugate()));
            }
        }
        phi.push(p);
    }
    Ansatz { generator: Generator::new(xi, phi), unknowns }
}

/// Collects the on-solution residual of `ansatz` by monomials in every
/// coordinate that is not an unknown.
pub fn extract_determining(sys: &EquationSystem, ansatz: &Ansatz) -> Result<DeterminingSystem> {
    let raw = apply_linearized_condition(sys, &ansatz.generator)?;
    let reduced = raw.par_iter().map(|r| reduce_on_solutions(r, sys)).collect::<Result<Vec<_>>>()?;
    let is_unknown: HashMap<&str, ()> = ansatz.unknowns.iter().map(|s| (&**s, ())).collect();
    let per_eq = reduced
        .par_iter()
        .enumerate()
        .map(|(k, r)| -> Result<BTreeMap<(usize, Monomial), Expr>> {
            let mut acc: BTreeMap<(usize, Monomial), Vec<Expr>> = BTreeMap::new();
            for (m, c) in r.terms() {
                let mut unknown = None;
                let mut rest = Vec::new();
                for (a, e) in m.atoms() {
                    match a {
                        Atom::Param(p) if is_unknown.contains_key(&**p) => {
                            if *e != 1 || unknown.is_some() {
                                return Err(SymmetryError::NotPolynomial(format!("nonlinear in `{p}`")));
                            }
                            unknown = Some(a.clone());
                        }
                        _ => {
                            let nested = a.children().iter().any(|ch| {
                                ch.any_atom(&mut |x| matches!(x, Atom::Param(p) if is_unknown.contains_key(&**p)))
                            });
                            if nested {
                                return Err(SymmetryError::NotPolynomial("unknown inside a function".into()));
                            }
                            rest.push((a.clone(), *e));
                        }
                    }
                }
                let Some(u) = unknown else {
                    return Err(SymmetryError::NotPolynomial("term free of unknowns".into()));
                };
                let term = Expr::term(c.clone(), Monomial(vec![(u, 1)]));
                acc.entry((k, Monomial(rest))).or_default().push(term);
            }
            Ok(acc.into_iter().map(|(key, v)| (key, v.into_iter().sum::<Expr>())).filter(|(_, e)| !e.is_zero()).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let equations = per_eq.into_iter().flatten().collect();
    Ok(DeterminingSystem { equations, unknowns: ansatz.unknowns.clone() })
}

impl DeterminingSystem {
    /// Real rows: each complex linear form yields its real and imaginary part.
    pub fn rows(&self) -> Vec<Vec<BigRational>> {
        let index: HashMap<&str, usize> = self.unknowns.iter().enumerate().map(|(i, s)| (&**s, i)).collect();
        let n = self.unknowns.len();
        let mut rows = Vec::with_capacity(2 * self.equations.len());
        for (_, e) in &self.equations {
            let mut re = vec![BigRational::zero(); n];
            let mut im = vec![BigRational::zero(); n];
            for (m, c) in e.terms() {
                if let [(Atom::Param(p), 1)] = m.0.as_slice() {
                    let col = index[&**p];
                    re[col] += &c.re;
                    im[col] += &c.im;
                }
            }
            for r in [re, im] {
                if r.iter().any(|v| !v.is_zero()) {
                    rows.push(r);
                }
            }
        }
        rows
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }
}

/// Solves the determining system of the generic degree-`d` ansatz exactly
/// and maps the nullspace basis back to generators.
pub fn classify_ansatz(sys: &EquationSystem, opts: ClassifyOptions) -> Result<Classification> {
    let ansatz = build_ansatz(sys, opts);
    let det = extract_determining(sys, &ansatz)?;
    let rows = det.rows();
    let n = ansatz.unknowns.len();
    let basis_vectors = linalg::nullspace(&rows, n);
    let mut basis = Vec::with_capacity(basis_vectors.len());
    for (k, v) in basis_vectors.iter().enumerate() {
        let mut b = Bindings::new();
        for (sym, val) in ansatz.unknowns.iter().zip(v) {
            b = b.param(sym, Expr::constant(GaussRat::real(val.clone())));
        }
        let g = ansatz.generator.substitute(&b)?;
        basis.push(g.named(&format!("g{}", k + 1)));
    }
    Ok(Classification {
        dimension: basis.len(),
        basis,
        unknowns: n,
        determining_equations: det.equations.len(),
    })
}

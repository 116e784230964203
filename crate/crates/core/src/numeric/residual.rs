//! Residual sampling of closed-form solutions.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::NumericError;
use crate::expr::{eval_numeric, Expr, Jet, MapAssignment};
use crate::scope::Scope;

/// Sampling range for one independent variable: real part uniform in
/// `[lo, hi]`, fixed imaginary part `imag`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub imag: f64,
}

impl Axis {
    pub fn real(lo: f64, hi: f64) -> Self {
        Axis { lo, hi, imag: 0.0 }
    }

    fn symmetric(&self) -> bool {
        self.lo == -self.hi && self.imag == 0.0
    }
}

/// A closed form for each dependent variable of `scope`, with numeric
/// parameter values and a sampling domain.
#[derive(Clone, Debug)]
pub struct SolutionAnsatz {
    pub scope: Scope,
    pub fields: Vec<Expr>,
    pub params: HashMap<String, Complex64>,
    pub domain: Vec<Axis>,
}

impl SolutionAnsatz {
    pub fn new(scope: Scope, fields: Vec<Expr>, domain: Vec<Axis>) -> Self {
        SolutionAnsatz { scope, fields, params: HashMap::new(), domain }
    }

    pub fn param(mut self, name: &str, v: impl Into<Complex64>) -> Self {
        self.params.insert(name.to_string(), v.into());
        self
    }

    fn env(&self, point: &[Complex64]) -> MapAssignment {
        let mut env = MapAssignment::new();
        for (i, v) in point.iter().enumerate() {
            env = env.with_var(i, *v);
        }
        env.params = self.params.clone();
        env
    }

    /// Evaluates `D^orders` of field `dep` at a point.
    pub fn eval_derivative(&self, dep: usize, orders: &[u32], point: &[Complex64]) -> Result<Complex64, NumericError> {
        let d = self.fields[dep].total_derivative_multi(orders)?;
        Ok(eval_numeric(&d, &self.env(point))?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub max_abs: f64,
    /// Largest `|residual| / (1 + largest term magnitude)`.
    pub max_rel: f64,
    pub samples: usize,
    /// Point with the largest relative residual.
    pub worst: Vec<Complex64>,
    pub rejected: usize,
}

impl ResidualReport {
    fn empty() -> Self {
        ResidualReport { max_abs: 0.0, max_rel: 0.0, samples: 0, worst: Vec::new(), rejected: 0 }
    }

    fn absorb(&mut self, point: &[Complex64], abs: f64, rel: f64) {
        self.samples += 1;
        self.max_abs = self.max_abs.max(abs);
        if rel > self.max_rel || self.worst.is_empty() {
            self.max_rel = rel.max(self.max_rel);
            self.worst = point.to_vec();
        }
    }
}

/// Values beyond this magnitude count as a singularity.
const BLOWUP: f64 = 1e12;

struct Evaluator<'a> {
    equation: &'a Expr,
    sol: &'a SolutionAnsatz,
    /// Symbolic derivatives of the fields keyed by `(dep, orders)`.
    derivs: HashMap<(usize, Vec<u32>), Expr>,
    shifts: HashMap<Jet, Vec<Complex64>>,
}

impl<'a> Evaluator<'a> {
    fn new(equation: &'a Expr, sol: &'a SolutionAnsatz) -> Result<Self, NumericError> {
        let mut derivs = HashMap::new();
        let mut shifts = HashMap::new();
        let base = sol.env(&[]);
        for j in equation.jets() {
            if j.dep >= sol.fields.len() {
                return Err(NumericError::Unsupported(format!("no closed form for dependent variable #{}", j.dep)));
            }
            let key = (j.dep, j.orders.clone());
            if !derivs.contains_key(&key) {
                derivs.insert(key, sol.fields[j.dep].total_derivative_multi(&j.orders)?);
            }
            if j.has_shift() {
                let s = j.shift.iter().map(|s| eval_numeric(s, &base)).collect::<Result<Vec<_>, _>>()?;
                shifts.insert(j.clone(), s);
            }
        }
        Ok(Evaluator { equation, sol, derivs, shifts })
    }

    /// Jet values at a point. A conjugated jet at `P = R(x) + σ` is the
    /// Schwarz function `conj(f(conj P))`, which is `conj(f(P))` at real
    /// points.
    fn env_at(&self, point: &[Complex64]) -> Result<MapAssignment, NumericError> {
        let mut env = self.sol.env(point);
        for j in self.equation.jets() {
            let mut p: Vec<Complex64> =
                point.iter().enumerate().map(|(i, v)| if j.mask >> i & 1 == 1 { -v } else { *v }).collect();
            if let Some(s) = self.shifts.get(&j) {
                for (a, b) in p.iter_mut().zip(s) {
                    *a += b;
                }
            }
            if j.conj {
                p.iter_mut().for_each(|z| *z = z.conj());
            }
            let v = eval_numeric(&self.derivs[&(j.dep, j.orders.clone())], &self.sol.env(&p))?;
            env.jets.insert(j.clone(), if j.conj { v.conj() } else { v });
        }
        Ok(env)
    }

    /// `(residual, largest term magnitude)`, or `None` at a singularity.
    fn value(&self, point: &[Complex64]) -> Result<Option<(Complex64, f64)>, NumericError> {
        let env = self.env_at(point)?;
        let mut total = Complex64::new(0.0, 0.0);
        let mut scale = 0.0f64;
        for (m, c) in self.equation.terms() {
            let t = eval_numeric(&Expr::term(c.clone(), m.clone()), &env)?;
            if !t.re.is_finite() || !t.im.is_finite() || t.norm() > BLOWUP {
                return Ok(None);
            }
            scale = scale.max(t.norm());
            total += t;
        }
        Ok(Some((total, scale)))
    }

    fn at(&self, point: &[Complex64]) -> Result<Option<(f64, f64)>, NumericError> {
        Ok(self.value(point)?.map(|(v, s)| (v.norm(), s)))
    }
}

/// The residual of `equation` for `sol` at one point, or `None` at a
/// singularity.
pub fn evaluate_residual(equation: &Expr, sol: &SolutionAnsatz, point: &[Complex64]) -> Result<Option<Complex64>, NumericError> {
    Ok(Evaluator::new(equation, sol)?.value(point)?.map(|(v, _)| v))
}

fn reflection_mask(e: &Expr) -> u32 {
    e.jets().iter().fold(0, |m, j| m | j.mask)
}

fn draw(rng: &mut ChaCha8Rng, domain: &[Axis]) -> Vec<Complex64> {
    domain
        .iter()
        .map(|a| {
            let re = if a.hi > a.lo { rng.gen_range(a.lo..a.hi) } else { a.lo };
            Complex64::new(re, a.imag)
        })
        .collect()
}

/// Evaluates `equation` on `n` sample points drawn with `seed`.
///
/// When every reflected axis has a symmetric real range the samples come in
/// pairs `x`, `R(x)`. Points where a term is non-finite or huge are
/// rejected and replaced, up to `10·n` draws in total.
pub fn residual_sample(equation: &Expr, sol: &SolutionAnsatz, n: usize, seed: u64) -> Result<ResidualReport, NumericError> {
    if sol.domain.len() != sol.scope.dim() {
        return Err(NumericError::Unsupported("domain needs one range per variable".into()));
    }
    let ev = Evaluator::new(equation, sol)?;
    let mask = reflection_mask(equation);
    let paired = mask != 0 && (0..sol.domain.len()).all(|i| mask >> i & 1 == 0 || sol.domain[i].symmetric());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ResidualReport::empty();
    let cap = 10 * n.max(1);
    let mut drawn = 0;
    while report.samples < n && drawn < cap {
        let want = (n - report.samples).min(cap - drawn);
        let mut batch = Vec::with_capacity(want);
        while batch.len() < want {
            let p = draw(&mut rng, &sol.domain);
            if paired && batch.len() + 1 < want {
                let r: Vec<Complex64> =
                    p.iter().enumerate().map(|(i, v)| if mask >> i & 1 == 1 { -v } else { *v }).collect();
                batch.push(p);
                batch.push(r);
            } else {
                batch.push(p);
            }
        }
        drawn += batch.len();
        let results: Vec<_> = batch.par_iter().map(|p| ev.at(p)).collect();
        for (p, r) in batch.iter().zip(results) {
            match r? {
                Some((abs, scale)) => report.absorb(p, abs, abs / (1.0 + scale)),
                None => report.rejected += 1,
            }
        }
    }
    if report.samples < n {
        return Err(NumericError::TooManyRejected { accepted: report.samples, wanted: n });
    }
    Ok(report)
}

/// Largest relative gap between each symbolic first derivative
/// `∂_i D^J f` (all `|J| < order`) and a five-point central difference of
/// `D^J f`, over `n` sample points.
pub fn derivative_agreement(sol: &SolutionAnsatz, order: u32, n: usize, seed: u64) -> Result<f64, NumericError> {
    let dim = sol.scope.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut multi: Vec<Vec<u32>> = vec![vec![0; dim]];
    let mut frontier = multi.clone();
    for _ in 1..order {
        let mut next = Vec::new();
        for o in &frontier {
            for i in 0..dim {
                let mut k = o.clone();
                k[i] += 1;
                if !multi.contains(&k) {
                    multi.push(k.clone());
                    next.push(k);
                }
            }
        }
        frontier = next;
    }
    let h = 1e-3;
    let mut worst = 0.0f64;
    for _ in 0..n {
        let p = draw(&mut rng, &sol.domain);
        for dep in 0..sol.fields.len() {
            for o in &multi {
                for i in 0..dim {
                    let f = |dx: f64| {
                        let mut q = p.clone();
                        q[i] += dx;
                        sol.eval_derivative(dep, o, &q)
                    };
                    let fd = (f(-2.0 * h)? - 8.0 * f(-h)? + 8.0 * f(h)? - f(2.0 * h)?) / (12.0 * h);
                    let mut up = o.clone();
                    up[i] += 1;
                    let sym = sol.eval_derivative(dep, &up, &p)?;
                    worst = worst.max((fd - sym).norm() / (1.0 + sym.norm()));
                }
            }
        }
    }
    Ok(worst)
}

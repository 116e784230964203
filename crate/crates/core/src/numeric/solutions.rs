//! The solution families checked by the toolkit: declared closed forms,
//! the Jacobi `sn` solution of the even NLS reduction, and the quadrature
//! solution of the integrated mKdV reduction.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::residual::{residual_sample, Axis, ResidualReport, SolutionAnsatz};
use super::NumericError;
use crate::expr::{eval_numeric, Expr, MapAssignment};
use crate::parser::{canonicalize, parse_expression, Document, ParseError};
use crate::scope::Scope;

/// A `solution` block: closed forms checked against the document's
/// equations.
#[derive(Clone, Debug)]
pub struct SolutionCase {
    pub name: String,
    pub ansatz: SolutionAnsatz,
    pub equations: Vec<(String, Expr)>,
    pub samples: usize,
    pub tolerance: f64,
    /// `false` for cases that are expected to leave a residual.
    pub expect_pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CaseReport {
    pub name: String,
    pub reports: Vec<(String, ResidualReport)>,
    pub tolerance: f64,
    pub expect_pass: bool,
}

impl CaseReport {
    pub fn max_rel(&self) -> f64 {
        self.reports.iter().map(|(_, r)| r.max_rel).fold(0.0, f64::max)
    }

    pub fn within_tolerance(&self) -> bool {
        self.max_rel() < self.tolerance
    }

    /// Whether the outcome is the declared one.
    pub fn as_expected(&self) -> bool {
        self.within_tolerance() == self.expect_pass
    }
}

fn number(e: &Expr) -> Result<Complex64, NumericError> {
    Ok(eval_numeric(e, &MapAssignment::new())?)
}

fn real(e: &Expr, span: crate::SourceSpan) -> Result<f64, NumericError> {
    let z = number(e)?;
    if z.im != 0.0 {
        return Err(ParseError::new("expected a real number", span).into());
    }
    Ok(z.re)
}

/// Reads every `solution` block of a document.
pub fn parse_solutions(doc: &Document) -> Result<Vec<SolutionCase>, NumericError> {
    let scope = &doc.scope;
    let sys = doc.system()?;
    let equations: Vec<(String, Expr)> = sys.equations.iter().map(|e| (e.name.clone(), e.expr.clone())).collect();
    let mut out = Vec::new();
    for b in doc.blocks("solution") {
        let name = b.name.clone().unwrap_or_else(|| "solution".into());
        let mut fields = Vec::with_capacity(scope.deps.len());
        for d in &scope.deps {
            fields.push(canonicalize(b.require(d)?.value(0)?, scope)?);
        }
        let mut domain = vec![Axis::real(-1.0, 1.0); scope.dim()];
        for it in b.items_with("domain") {
            let v = it.label_required()?;
            let axis = scope.var_index(v).ok_or_else(|| ParseError::new(format!("unknown variable `{v}`"), it.span))?;
            let vals = it
                .values
                .iter()
                .map(|t| canonicalize(t, scope).map_err(NumericError::from).and_then(|e| real(&e, t.span)))
                .collect::<Result<Vec<f64>, _>>()?;
            let [lo, hi, rest @ ..] = vals.as_slice() else {
                return Err(ParseError::new("`domain v: lo, hi[, imag]`", it.span).into());
            };
            domain[axis] = Axis { lo: *lo, hi: *hi, imag: rest.first().copied().unwrap_or(0.0) };
        }
        let mut ansatz = SolutionAnsatz::new(scope.clone(), fields, domain);
        for it in b.items_with("param") {
            for v in &it.values {
                let (l, r) = v.as_equation().ok_or_else(|| ParseError::new("expected `name = value`", v.span))?;
                let n = l.as_ident().ok_or_else(|| ParseError::new("expected a parameter name", l.span))?;
                ansatz = ansatz.param(n, number(&canonicalize(r, scope)?)?);
            }
        }
        let samples = match b.item("samples") {
            Some(it) => real(&canonicalize(it.value(0)?, scope)?, it.span)? as usize,
            None => 256,
        };
        let tolerance = match b.item("tolerance") {
            Some(it) => real(&canonicalize(it.value(0)?, scope)?, it.span)?,
            None => 1e-10,
        };
        let expect_pass = match b.item("expect") {
            None => true,
            Some(it) => match it.value(0)?.as_ident() {
                Some("pass") => true,
                Some("fail") => false,
                _ => return Err(ParseError::new("`expect` is pass or fail", it.span).into()),
            },
        };
        out.push(SolutionCase { name, ansatz, equations: equations.clone(), samples, tolerance, expect_pass });
    }
    Ok(out)
}

pub fn check_case(case: &SolutionCase, seed: u64) -> Result<CaseReport, NumericError> {
    let reports = case
        .equations
        .iter()
        .map(|(n, e)| Ok((n.clone(), residual_sample(e, &case.ansatz, case.samples, seed)?)))
        .collect::<Result<_, NumericError>>()?;
    Ok(CaseReport { name: case.name.clone(), reports, tolerance: case.tolerance, expect_pass: case.expect_pass })
}

fn sn_scope() -> Scope {
    Scope::new(&["y"], &["p"]).complex(true)
}

/// The real `sn` solution of `4y p'' + 2p' - c p + 2p²p̄ = 0`. The second
/// argument of `sn` in the closed form is the modulus `k = C2/√(c-1)`; the
/// expression uses the parameter `m = k²`.
pub fn sn_ansatz(c: f64, c1: f64, c2: f64) -> Result<SolutionAnsatz, NumericError> {
    let scope = sn_scope();
    // y < 0 keeps √(-(c-1)y) real once c > 1
    let domain = vec![Axis::real(-4.0, -0.05)];
    if c == 0.0 || c2 == 0.0 {
        let zero = SolutionAnsatz::new(scope, vec![Expr::zero()], domain);
        return Ok(zero.param("c", c).param("C1", c1).param("C2", c2));
    }
    if c <= 1.0 {
        return Err(NumericError::Domain(format!("c = {c}: c > 1 is needed for a real modulus C2/sqrt(c-1)")));
    }
    let m = c2 * c2 / (c - 1.0);
    if m > 1.0 {
        return Err(NumericError::Domain(format!("C2^2 = {} exceeds c - 1 = {}: modulus outside [0, 1]", c2 * c2, c - 1.0)));
    }
    let field = parse_expression(
        "C2*sqrt(c/(C2^2 + c - 1))*sn(sqrt(c/(C2^2 + c - 1))*(sqrt(-(c - 1)*y) + C1), C2^2/(c - 1))",
        &scope,
    )?;
    Ok(SolutionAnsatz::new(scope, vec![field], domain).param("c", c).param("C1", c1).param("C2", c2))
}

pub fn check_sn_solution(c: f64, c1: f64, c2: f64, n: usize, seed: u64) -> Result<ResidualReport, NumericError> {
    let sol = sn_ansatz(c, c1, c2)?;
    let eq = parse_expression("4*y*D[p,y,y] + 2*D[p,y] - c*p + 2*p^2*conj(p)", &sol.scope)?;
    residual_sample(&eq, &sol, n, seed)
}

/// `z = ∫_0^v √6 b^{3/2} / √Q(s) ds` with
/// `Q(s) = -b s⁴ + 6a s² - 12 C1 s + 6 C2 b³`, inverted numerically.
#[derive(Clone, Debug)]
pub struct QuadratureSolution {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    /// Upper end of the sampled branch, inside the first positive root of `Q`.
    pub v_end: f64,
}

impl QuadratureSolution {
    pub fn new(a: f64, b: f64, c1: f64, c2: f64) -> Result<Self, NumericError> {
        if b <= 0.0 {
            return Err(NumericError::Domain(format!("b = {b}: b^(3/2) needs b > 0")));
        }
        let mut q = QuadratureSolution { a, b, c1, c2, v_end: 0.0 };
        if q.quartic(0.0) <= 0.0 {
            return Err(NumericError::Domain("the quartic under the root is not positive at v = 0".into()));
        }
        let root = q.first_root()?;
        q.v_end = 0.9 * root;
        Ok(q)
    }

    pub fn quartic(&self, s: f64) -> f64 {
        let QuadratureSolution { a, b, c1, c2, .. } = *self;
        -b * s.powi(4) + 6.0 * a * s * s - 12.0 * c1 * s + 6.0 * c2 * b.powi(3)
    }

    fn integrand(&self, s: f64) -> f64 {
        6f64.sqrt() * self.b.powf(1.5) / self.quartic(s).sqrt()
    }

    fn first_root(&self) -> Result<f64, NumericError> {
        let mut hi = 1e-3;
        while self.quartic(hi) > 0.0 {
            hi *= 1.5;
            if hi > 1e8 {
                return Err(NumericError::Domain("no root of the quartic found".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.quartic(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// `z(v)`.
    pub fn integral(&self, v: f64) -> f64 {
        quadrature::double_exponential::integrate(|s| self.integrand(s), 0.0, v, 1e-14).integral
    }

    /// `v(z)` by Newton steps on `z(v)` safeguarded by bisection.
    pub fn invert(&self, z: f64) -> Result<f64, NumericError> {
        let (mut lo, mut hi) = (0.0, self.v_end);
        if z < 0.0 || z > self.integral(hi) {
            return Err(NumericError::Domain(format!("z = {z} is outside the sampled branch")));
        }
        let mut v = 0.5 * hi;
        for _ in 0..100 {
            let r = self.integral(v) - z;
            if r.abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
            if r > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            let next = v - r / self.integrand(v);
            v = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        }
        Ok(v)
    }
}

/// Samples `v(z)` from the quadrature and checks
/// `b³ v'' + (b/3) v³ - a v + C1 = 0` with `v''` from a five-point stencil
/// on the inverted values.
pub fn check_quadrature(a: f64, b: f64, c1: f64, c2: f64, n: usize, seed: u64) -> Result<ResidualReport, NumericError> {
    let q = QuadratureSolution::new(a, b, c1, c2)?;
    let z_end = q.integral(q.v_end);
    let h = 0.01 * z_end;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = ResidualReport { max_abs: 0.0, max_rel: 0.0, samples: 0, worst: Vec::new(), rejected: 0 };
    for _ in 0..n {
        let z = rng.gen_range(0.1 * z_end..0.9 * z_end);
        let v = |k: f64| q.invert(z + k * h);
        let (m2, m1, v0, p1, p2) = (v(-2.0)?, v(-1.0)?, v(0.0)?, v(1.0)?, v(2.0)?);
        let vzz = (-p2 + 16.0 * p1 - 30.0 * v0 + 16.0 * m1 - m2) / (12.0 * h * h);
        let terms = [b.powi(3) * vzz, b / 3.0 * v0.powi(3), -a * v0, c1];
        let res = terms.iter().sum::<f64>().abs();
        let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let rel = res / (1.0 + scale);
        report.samples += 1;
        report.max_abs = report.max_abs.max(res);
        if rel >= report.max_rel {
            report.max_rel = rel;
            report.worst = vec![Complex64::new(z, 0.0)];
        }
    }
    Ok(report)
}

//! Jacobi elliptic functions by the descending Landen (AGM) scheme.
//!
//! The second argument is the parameter `m = k²`.

use num_complex::Complex64;

const TOL: f64 = 1e-15;
const MAX_STEPS: usize = 40;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("elliptic parameter m = {0} outside [0, 1]")]
pub struct ModulusError(pub f64);

/// `(sn, cn, dn)` of a real argument for `0 ≤ m ≤ 1`.
pub fn jacobi(u: f64, m: f64) -> Result<(f64, f64, f64), ModulusError> {
    if !(0.0..=1.0).contains(&m) || m.is_nan() {
        return Err(ModulusError(m));
    }
    Ok(jacobi_unchecked(u, m))
}

pub fn jacobi_sn(u: f64, m: f64) -> Result<f64, ModulusError> {
    jacobi(u, m).map(|t| t.0)
}

fn jacobi_unchecked(u: f64, m: f64) -> (f64, f64, f64) {
    if m == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if m == 1.0 {
        let s = 1.0 / u.cosh();
        return (u.tanh(), s, s);
    }
    let mut a = [0.0f64; MAX_STEPS + 1];
    let mut c = [0.0f64; MAX_STEPS + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while c[n].abs() > TOL && n < MAX_STEPS {
        let an = a[n];
        a[n + 1] = 0.5 * (an + b);
        c[n + 1] = 0.5 * (an - b);
        b = (an * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = if n == 0 { 1.0 } else { cn / (prev - phi).cos() };
    (sn, cn, dn)
}

/// `(sn, cn, dn)` for any real `m`, using the reciprocal-parameter and
/// negative-parameter transformations to reach `[0, 1]`.
pub fn jacobi_real_m(u: f64, m: f64) -> (f64, f64, f64) {
    if m > 1.0 {
        let k = m.sqrt();
        let (s, c, d) = jacobi_unchecked(u * k, 1.0 / m);
        (s / k, d, c)
    } else if m < 0.0 {
        let r = (1.0 - m).sqrt();
        let mu = -m / (1.0 - m);
        let (s, c, d) = jacobi_unchecked(u * r, mu);
        (s / (d * r), c / d, 1.0 / d)
    } else {
        jacobi_unchecked(u, m)
    }
}

/// Complex argument, real parameter, via the addition theorem with Jacobi's
/// imaginary transformation.
pub fn jacobi_complex(z: Complex64, m: f64) -> (Complex64, Complex64, Complex64) {
    let (s, c, d) = jacobi_real_m(z.re, m);
    if z.im == 0.0 {
        return (s.into(), c.into(), d.into());
    }
    let (s1, c1, d1) = jacobi_real_m(z.im, 1.0 - m);
    let delta = c1 * c1 + m * s * s * s1 * s1;
    let sn = Complex64::new(s * d1, c * d * s1 * c1) / delta;
    let cn = Complex64::new(c * c1, -s * d * s1 * d1) / delta;
    let dn = Complex64::new(d * c1 * d1, -m * s * c * s1) / delta;
    (sn, cn, dn)
}

/// Complete elliptic integral of the first kind, `K(m) = π / (2·agm(1, √(1-m)))`.
pub fn complete_k(m: f64) -> Result<f64, ModulusError> {
    if !(0.0..1.0).contains(&m) {
        return Err(ModulusError(m));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    for _ in 0..MAX_STEPS {
        if (a - b).abs() <= TOL * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(std::f64::consts::PI / (2.0 * a))
}

//! Exact Gaussian-rational coefficients `re + i*im` with `re, im ∈ ℚ`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn real(re: BigRational) -> Self {
        GaussRat { re, im: BigRational::zero() }
    }

    pub fn int(n: i64) -> Self {
        Self::real(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::real(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn i() -> Self {
        GaussRat { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.im.is_zero() && self.re.is_integer()
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.re.to_integer().to_i64()
        } else {
            None
        }
    }

    pub fn conj(&self) -> Self {
        GaussRat { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Sign convention used to pick canonical representatives of `±u`:
    /// negative iff `re < 0`, or `re == 0` and `im < 0`.
    pub fn is_negative(&self) -> bool {
        self.re.is_negative() || (self.re.is_zero() && self.im.is_negative())
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRat { re: &self.re / &n, im: -(&self.im / &n) })
    }

    pub fn pow(&self, k: i32) -> Option<Self> {
        let base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = GaussRat::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &sq;
            }
            e >>= 1;
            if e > 0 {
                sq = &sq * &sq;
            }
        }
        Some(acc)
    }

    /// Exact `n`-th root when one exists among Gaussian rationals that are
    /// real, or purely imaginary square roots of negative rationals.
    pub fn exact_root(&self, n: u32) -> Option<Self> {
        if !self.im.is_zero() {
            return None;
        }
        let neg = self.re.is_negative();
        let abs = self.re.abs();
        let num = int_root(abs.numer(), n)?;
        let den = int_root(abs.denom(), n)?;
        let r = BigRational::new(num, den);
        match (neg, n % 2) {
            (false, _) => Some(GaussRat::real(r)),
            (true, 1) => Some(GaussRat::real(-r)),
            (true, _) if n == 2 => Some(GaussRat::new(BigRational::zero(), r)),
            _ => None,
        }
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    /// Parses a decimal literal such as `12`, `0.25` or `1.5e-3` exactly.
    pub fn from_decimal(text: &str) -> Option<Self> {
        let (mantissa, exp) = match text.find(['e', 'E']) {
            Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
            None => (text, 0),
        };
        let (int_part, frac_part) = match mantissa.find('.') {
            Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
            None => (mantissa, ""),
        };
        let digits = format!("{int_part}{frac_part}");
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let n: BigInt = digits.parse().ok()?;
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10);
        let r = if scale >= 0 {
            BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
        };
        Some(GaussRat::real(r))
    }
}

fn int_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *n {
        Some(r)
    } else {
        None
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        if self.im.is_zero() && o.im.is_zero() {
            return GaussRat::real(&self.re * &o.re);
        }
        GaussRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Div for &GaussRat {
    type Output = GaussRat;
    fn div(self, o: &GaussRat) -> GaussRat {
        self * &o.recip().expect("division by zero coefficient")
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl Neg for GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { re: -self.re, im: -self.im }
    }
}

impl AddAssign<&GaussRat> for GaussRat {
    fn add_assign(&mut self, o: &GaussRat) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

impl From<i64> for GaussRat {
    fn from(n: i64) -> Self {
        GaussRat::int(n)
    }
}

fn fmt_rat(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.is_integer() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    /// Prints a form the DSL parser reads back: `3/2`, `-i`, `(1/2 + 3*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => fmt_rat(&self.re, f),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im.clone()).is_one() {
                    write!(f, "-i")
                } else {
                    fmt_rat(&self.im, f)?;
                    write!(f, "*i")
                }
            }
            (false, false) => {
                write!(f, "(")?;
                fmt_rat(&self.re, f)?;
                if self.im.is_negative() {
                    write!(f, " - ")?;
                    fmt_rat(&self.im.abs(), f)?;
                } else {
                    write!(f, " + ")?;
                    fmt_rat(&self.im, f)?;
                }
                write!(f, "*i)")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_in_gaussian_rationals() {
        let a = GaussRat::new(BigRational::new(1.into(), 2.into()), BigRational::one());
        let inv = a.recip().unwrap();
        assert!((&a * &inv).is_one());
        assert_eq!(&GaussRat::i() * &GaussRat::i(), GaussRat::int(-1));
        assert_eq!(GaussRat::i().pow(-1).unwrap(), -GaussRat::i());
        assert!(GaussRat::zero().recip().is_none());
    }

    #[test]
    fn exact_roots() {
        assert_eq!(GaussRat::int(9).exact_root(2), Some(GaussRat::int(3)));
        assert_eq!(GaussRat::int(-8).exact_root(3), Some(GaussRat::int(-2)));
        assert_eq!(GaussRat::int(-4).exact_root(2), Some(&GaussRat::int(2) * &GaussRat::i()));
        assert_eq!(GaussRat::int(6).exact_root(2), None);
        assert_eq!(GaussRat::ratio(1, 4).exact_root(2), Some(GaussRat::ratio(1, 2)));
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(GaussRat::from_decimal("0.6"), Some(GaussRat::ratio(3, 5)));
        assert_eq!(GaussRat::from_decimal("1.5e-3"), Some(GaussRat::ratio(3, 2000)));
        assert_eq!(GaussRat::from_decimal("12"), Some(GaussRat::int(12)));
        assert_eq!(GaussRat::from_decimal("x"), None);
    }
}

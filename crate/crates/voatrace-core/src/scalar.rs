//! Exact scalars: arbitrary-precision rationals and Gaussian rationals.
//!
//! Every coefficient in the crate is a [`GaussianRational`]: a pair of
//! arbitrary-precision rationals `re + im*i` kept in lowest terms. Purely
//! real computations simply carry `im = 0`. The module also provides the
//! `p/q` string forms used by the JSON interfaces and a handful of exact
//! combinatorial helpers (factorials, generalized binomials).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational number, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Shorthand for an integer rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Render a rational as `p/q` with decimal integer strings. The denominator
/// is always printed, so integers come out as e.g. `3/1`.
pub fn render_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `p/q` or a bare integer `p`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::BadNumber(s.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| bad())?;
        let d: BigInt = den.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational::new(n, d))
    } else {
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_integer(n))
    }
}

/// Exact Gaussian rational `re + im*i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn from_rational(re: Rational) -> Self {
        GaussianRational {
            re,
            im: Rational::zero(),
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rat(n))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussianRational {
            re: Rational::zero(),
            im: Rational::one(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Squared modulus `re^2 + im^2`.
    pub fn norm(&self) -> Rational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn inv(&self) -> Result<Self> {
        let n = self.norm();
        if n.is_zero() {
            return Err(Error::NonInvertible);
        }
        Ok(GaussianRational {
            re: &self.re / &n,
            im: -&self.im / &n,
        })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Render as a pair of `p/q` strings.
    pub fn render_pair(&self) -> (String, String) {
        (render_rational(&self.re), render_rational(&self.im))
    }

    /// Parse forms like `3`, `-1/2`, `i`, `-i`, `2i`, `1/2i`, `1+i`, `3/2-1/3i`.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::BadNumber(s.clone());
        if s.is_empty() {
            return Err(bad());
        }
        // Split into signed terms.
        let mut terms: Vec<String> = Vec::new();
        let mut cur = String::new();
        for (idx, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && idx > 0 {
                terms.push(std::mem::take(&mut cur));
                if ch == '-' {
                    cur.push('-');
                }
            } else {
                cur.push(ch);
            }
        }
        terms.push(cur);

        let mut re = Rational::zero();
        let mut im = Rational::zero();
        for t in terms {
            if t.is_empty() {
                return Err(bad());
            }
            if let Some(body) = t.strip_suffix('i') {
                let coeff = match body {
                    "" => Rational::one(),
                    "-" => -Rational::one(),
                    other => parse_rational(other)?,
                };
                im += coeff;
            } else {
                re += parse_rational(&t)?;
            }
        }
        Ok(GaussianRational { re, im })
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            return write!(f, "{}", self.re);
        }
        if self.re.is_zero() {
            if self.im.is_one() {
                return write!(f, "i");
            }
            if self.im == -Rational::one() {
                return write!(f, "-i");
            }
            return write!(f, "{}i", self.im);
        }
        if self.im.is_positive() {
            if self.im.is_one() {
                write!(f, "{}+i", self.re)
            } else {
                write!(f, "{}+{}i", self.re, self.im)
            }
        } else if self.im == -Rational::one() {
            write!(f, "{}-i", self.re)
        } else {
            write!(f, "{}{}i", self.re, self.im)
        }
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -self.re.clone(),
            im: -self.im.clone(),
        }
    }
}

impl Neg for GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Div for &GaussianRational {
    type Output = GaussianRational;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussianRational) -> GaussianRational {
        let inv = rhs.inv().expect("division by zero GaussianRational");
        self * &inv
    }
}

impl AddAssign<&GaussianRational> for GaussianRational {
    fn add_assign(&mut self, rhs: &GaussianRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussianRational> for GaussianRational {
    fn sub_assign(&mut self, rhs: &GaussianRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&GaussianRational> for GaussianRational {
    fn mul_assign(&mut self, rhs: &GaussianRational) {
        *self = &*self * rhs;
    }
}

impl Mul<&Rational> for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &Rational) -> GaussianRational {
        GaussianRational {
            re: &self.re * rhs,
            im: &self.im * rhs,
        }
    }
}

impl From<i64> for GaussianRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<Rational> for GaussianRational {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= BigInt::from(k);
    }
    acc
}

/// Generalized binomial `binom(n, k)` with integer (possibly negative) `n`.
pub fn binomial(n: i64, k: u64) -> BigInt {
    let mut num = BigInt::one();
    for j in 0..k {
        num *= BigInt::from(n) - BigInt::from(j);
    }
    num / factorial(k)
}

/// Double factorial `(2r-1)!! = 1*3*5*...*(2r-1)`, with `(-1)!! = 1`.
pub fn odd_double_factorial(r: u64) -> BigInt {
    let mut acc = BigInt::one();
    for k in 1..=r as i64 {
        acc *= BigInt::from(2 * k - 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_round_trip() {
        for s in ["3/4", "-3/4", "0/1", "7", "-12/24"] {
            let r = parse_rational(s).unwrap();
            let rendered = render_rational(&r);
            assert_eq!(parse_rational(&rendered).unwrap(), r);
        }
        assert_eq!(parse_rational("-12/24").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn gaussian_parse_forms() {
        assert_eq!(GaussianRational::parse("i").unwrap(), GaussianRational::i());
        assert_eq!(
            GaussianRational::parse("-i").unwrap(),
            -GaussianRational::i()
        );
        assert_eq!(
            GaussianRational::parse("1/2-1/3i").unwrap(),
            GaussianRational::new(ratio(1, 2), ratio(-1, 3))
        );
        assert_eq!(
            GaussianRational::parse("2i").unwrap(),
            GaussianRational::new(rat(0), rat(2))
        );
        let x = GaussianRational::parse("3/2+5i").unwrap();
        assert_eq!(GaussianRational::parse(&x.to_string()).unwrap(), x);
    }

    #[test]
    fn gaussian_field_ops() {
        let a = GaussianRational::new(rat(1), rat(2));
        let b = GaussianRational::new(rat(-3), ratio(1, 2));
        let prod = &a * &b;
        // (1+2i)(-3+i/2) = -3 + i/2 - 6i + i^2 = -4 - 11/2 i
        assert_eq!(prod, GaussianRational::new(rat(-4), ratio(-11, 2)));
        let quot = &prod / &b;
        assert_eq!(quot, a);
        assert_eq!(&a * &a.inv().unwrap(), GaussianRational::one());
    }

    #[test]
    fn combinatorial_helpers() {
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(-8, 5), BigInt::from(-792));
        assert_eq!(binomial(-1, 3), BigInt::from(-1));
        assert_eq!(odd_double_factorial(0), BigInt::from(1));
        assert_eq!(odd_double_factorial(2), BigInt::from(3));
        assert_eq!(odd_double_factorial(3), BigInt::from(15));
    }
}

//! Truncated sparse q-expansions with exact rational exponents.
//!
//! A [`QSeries`] is a finite map from exponents to Gaussian-rational
//! coefficients together with a truncation order `T`: the series is exact for
//! every exponent strictly below `T`. Exponents are rationals with a bounded
//! common denominator (1/24 shifts from the central charge, coset norms from
//! dual lattices), stored internally as integer numerators over one shared
//! denominator so that comparisons and convolution stay cheap.
//!
//! All operations are pure; truncations propagate pessimistically and no
//! operation ever extends precision.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{parse_rational, rat, render_rational, GaussianRational, Rational};

/// Sparse exact q-expansion, valid for all exponents `< truncation`.
#[derive(Debug, Clone)]
pub struct QSeries {
    /// Positive common denominator of all exponents and the truncation.
    den: i64,
    /// Exponent numerators (over `den`) mapped to nonzero coefficients.
    terms: BTreeMap<i64, GaussianRational>,
    /// Truncation numerator over `den`.
    trunc_num: i64,
}

fn rational_to_scaled(r: &Rational, den: i64) -> i64 {
    let num = r.numer();
    let d = r.denom();
    let scaled = num * den / d;
    scaled.to_i64().expect("exponent out of range")
}

impl QSeries {
    /// The zero series, exact below `trunc`.
    pub fn zero(trunc: &Rational) -> Self {
        let den = trunc
            .denom()
            .to_i64()
            .expect("truncation denominator too large");
        let mut s = QSeries {
            den,
            terms: BTreeMap::new(),
            trunc_num: trunc.numer().to_i64().expect("truncation out of range"),
        };
        s.normalize();
        s
    }

    /// The constant series 1, exact below `trunc`.
    pub fn one(trunc: &Rational) -> Self {
        Self::monomial(&Rational::zero(), &GaussianRational::one(), trunc)
    }

    /// A single term `coeff * q^exp`, exact below `trunc`.
    pub fn monomial(exp: &Rational, coeff: &GaussianRational, trunc: &Rational) -> Self {
        let mut s = Self::zero(trunc);
        if exp < trunc && !coeff.is_zero() {
            s = s.rescaled_to_include(exp.denom().to_i64().expect("exponent denominator"));
            let key = rational_to_scaled(exp, s.den);
            s.terms.insert(key, coeff.clone());
            s.normalize();
        }
        s
    }

    /// Build from `(exponent, coefficient)` pairs; terms at or above `trunc`
    /// are dropped, zero coefficients are not stored.
    pub fn from_terms<I>(pairs: I, trunc: &Rational) -> Self
    where
        I: IntoIterator<Item = (Rational, GaussianRational)>,
    {
        let mut den = trunc.denom().to_i64().expect("truncation denominator");
        let pairs: Vec<(Rational, GaussianRational)> = pairs.into_iter().collect();
        for (e, _) in &pairs {
            den = lcm_i64(den, e.denom().to_i64().expect("exponent denominator"));
        }
        let mut terms: BTreeMap<i64, GaussianRational> = BTreeMap::new();
        let trunc_num = rational_to_scaled(trunc, den);
        for (e, c) in pairs {
            let key = rational_to_scaled(&e, den);
            if key < trunc_num && !c.is_zero() {
                let slot = terms.entry(key).or_insert_with(GaussianRational::zero);
                *slot += &c;
                if slot.is_zero() {
                    terms.remove(&key);
                }
            }
        }
        let mut s = QSeries {
            den,
            terms,
            trunc_num,
        };
        s.normalize();
        s
    }

    /// Truncation order `T`.
    pub fn truncation(&self) -> Rational {
        Rational::new(self.trunc_num.into(), self.den.into())
    }

    /// Least stored exponent, or `None` for the zero series.
    pub fn val(&self) -> Option<Rational> {
        self.terms
            .keys()
            .next()
            .map(|k| Rational::new((*k).into(), self.den.into()))
    }

    /// `val` with the convention that the zero series has valuation `T`.
    fn val_or_trunc(&self) -> Rational {
        self.val().unwrap_or_else(|| self.truncation())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate `(exponent, coefficient)` in ascending exponent order.
    pub fn iter(&self) -> impl Iterator<Item = (Rational, &GaussianRational)> + '_ {
        self.terms
            .iter()
            .map(move |(k, c)| (Rational::new((*k).into(), self.den.into()), c))
    }

    /// Coefficient at `exp`: `None` when `exp >= truncation` (unknown),
    /// otherwise the exact value (zero when absent).
    pub fn coeff(&self, exp: &Rational) -> Option<GaussianRational> {
        if *exp >= self.truncation() {
            return None;
        }
        let scaled = exp.numer() * self.den;
        if (&scaled % exp.denom()).is_zero() {
            let key = (scaled / exp.denom())
                .to_i64()
                .expect("exponent out of range");
            Some(
                self.terms
                    .get(&key)
                    .cloned()
                    .unwrap_or_else(GaussianRational::zero),
            )
        } else {
            // Exponent not representable over our denominator: coefficient is 0.
            Some(GaussianRational::zero())
        }
    }

    /// Restrict to exponents `< new_trunc` (never extends).
    pub fn truncated(&self, new_trunc: &Rational) -> Self {
        if *new_trunc >= self.truncation() {
            return self.clone();
        }
        let den = lcm_i64(
            self.den,
            new_trunc.denom().to_i64().expect("truncation denominator"),
        );
        let mut out = self.rescaled_to_include(den);
        out.trunc_num = rational_to_scaled(new_trunc, out.den);
        out.terms.retain(|k, _| *k < out.trunc_num);
        out.normalize();
        out
    }

    /// Shift every exponent (and the truncation) by `delta`.
    pub fn shifted(&self, delta: &Rational) -> Self {
        let den = lcm_i64(self.den, delta.denom().to_i64().expect("shift denominator"));
        let mut s = self.rescaled_to_include(den);
        let d = rational_to_scaled(delta, s.den);
        s.terms = s.terms.into_iter().map(|(k, c)| (k + d, c)).collect();
        s.trunc_num += d;
        s.normalize();
        s
    }

    /// Multiply all coefficients by a scalar.
    pub fn scaled(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(&self.truncation());
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= c;
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scaled(&(-GaussianRational::one()))
    }

    /// Pointwise sum; the result is exact below the smaller truncation.
    pub fn add(&self, rhs: &Self) -> Self {
        let den = lcm_i64(self.den, rhs.den);
        let a = self.rescaled_to_include(den);
        let b = rhs.rescaled_to_include(den);
        let trunc_num = a.trunc_num.min(b.trunc_num);
        let mut terms = a.terms;
        terms.retain(|k, _| *k < trunc_num);
        for (k, c) in b.terms {
            if k >= trunc_num {
                continue;
            }
            let slot = terms.entry(k).or_insert_with(GaussianRational::zero);
            *slot += &c;
            if slot.is_zero() {
                terms.remove(&k);
            }
        }
        let mut s = QSeries {
            den,
            terms,
            trunc_num,
        };
        s.normalize();
        s
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    /// Cauchy product. The result is exact below
    /// `min(a.T + val(b), b.T + val(a))`, with `val` of the zero series taken
    /// to be its truncation.
    pub fn mul(&self, rhs: &Self) -> Self {
        let t = {
            let ta = self.truncation() + rhs.val_or_trunc();
            let tb = rhs.truncation() + self.val_or_trunc();
            ta.min(tb)
        };
        let den = lcm_i64(self.den, rhs.den);
        let a = self.rescaled_to_include(den);
        let b = rhs.rescaled_to_include(den);
        let trunc_num = rational_to_scaled(&t, den);
        let mut terms: BTreeMap<i64, GaussianRational> = BTreeMap::new();
        for (ka, ca) in &a.terms {
            for (kb, cb) in &b.terms {
                let k = ka + kb;
                if k >= trunc_num {
                    // b's keys ascend, so later kb only grow.
                    break;
                }
                let prod = ca * cb;
                if prod.is_zero() {
                    continue;
                }
                let slot = terms.entry(k).or_insert_with(GaussianRational::zero);
                *slot += &prod;
                if slot.is_zero() {
                    terms.remove(&k);
                }
            }
        }
        let mut s = QSeries {
            den,
            terms,
            trunc_num,
        };
        s.normalize();
        s
    }

    /// Reciprocal of the series. Fails when the series is zero to the
    /// displayed order. If `self = c q^v (1 + u)`, the result is
    /// `c^{-1} q^{-v} (1 + u)^{-1}`, exact below `T - 2v`.
    pub fn inverse(&self) -> Result<Self> {
        let v = self.val().ok_or(Error::NonInvertible)?;
        let lead = self
            .coeff(&v)
            .expect("valuation below truncation")
            .inv()
            .expect("leading coefficient nonzero");
        // Normalized unit part 1 + u with val(u) > 0.
        let window = self.truncation() - &v;
        let unit = self.shifted(&-v.clone()).scaled(&lead);
        let u = unit.sub(&Self::one(&window));
        let mut sum = Self::one(&window);
        let mut pw = Self::one(&window);
        let minus_u = u.neg();
        loop {
            pw = pw.mul(&minus_u).truncated(&window);
            if pw.is_zero() {
                break;
            }
            sum = sum.add(&pw);
        }
        Ok(sum.scaled(&lead).shifted(&-v))
    }

    /// Integer power via repeated multiplication; negative powers invert the
    /// normalized unit part first.
    pub fn pow(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Self::one(&self.truncation()));
        }
        let (base, n) = if k < 0 {
            (self.inverse()?, (-k) as u64)
        } else {
            (self.clone(), k as u64)
        };
        let mut acc = base.clone();
        for _ in 1..n {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Evaluate at a point of the upper half plane with `q = exp(2 pi i tau)`.
    pub fn eval_at_tau(&self, tau: Complex64) -> Result<Complex64> {
        if tau.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane(tau.im));
        }
        let two_pi_i_tau = Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tau;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in &self.terms {
            let e = *k as f64 / self.den as f64;
            let coeff = Complex64::new(
                c.re.to_f64().expect("coefficient out of f64 range"),
                c.im.to_f64().expect("coefficient out of f64 range"),
            );
            acc += coeff * (two_pi_i_tau * e).exp();
        }
        Ok(acc)
    }

    /// Structural identity: same truncation and same term map. Stricter than
    /// `==`, which compares only below the common truncation.
    pub fn identical(&self, rhs: &Self) -> bool {
        self.den == rhs.den && self.trunc_num == rhs.trunc_num && self.terms == rhs.terms
    }

    fn rescaled_to_include(&self, den: i64) -> Self {
        let den = lcm_i64(self.den, den);
        if den == self.den {
            return self.clone();
        }
        let f = den / self.den;
        QSeries {
            den,
            terms: self.terms.iter().map(|(k, c)| (k * f, c.clone())).collect(),
            trunc_num: self.trunc_num * f,
        }
    }

    /// Reduce to the least common exponent denominator.
    fn normalize(&mut self) {
        let mut g = self.trunc_num.gcd(&self.den);
        for k in self.terms.keys() {
            g = g.gcd(k);
            if g == 1 {
                break;
            }
        }
        if g > 1 {
            self.den /= g;
            self.trunc_num /= g;
            self.terms = std::mem::take(&mut self.terms)
                .into_iter()
                .map(|(k, c)| (k / g, c))
                .collect();
        }
        debug_assert!(self.den >= 1);
        debug_assert!(self.terms.keys().all(|k| *k < self.trunc_num));
    }

    /// JSON wire form.
    pub fn to_wire(&self) -> QSeriesWire {
        QSeriesWire {
            truncation: render_rational(&self.truncation()),
            terms: self
                .iter()
                .map(|(e, c)| {
                    let (re, im) = c.render_pair();
                    QSeriesTermWire {
                        exponent: render_rational(&e),
                        re,
                        im,
                    }
                })
                .collect(),
        }
    }

    pub fn from_wire(wire: &QSeriesWire) -> Result<Self> {
        let trunc = parse_rational(&wire.truncation)?;
        let mut pairs = Vec::with_capacity(wire.terms.len());
        for t in &wire.terms {
            pairs.push((
                parse_rational(&t.exponent)?,
                GaussianRational::new(parse_rational(&t.re)?, parse_rational(&t.im)?),
            ));
        }
        Ok(Self::from_terms(pairs, &trunc))
    }
}

fn lcm_i64(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

/// Equality below the smaller of the two truncations.
impl PartialEq for QSeries {
    fn eq(&self, other: &Self) -> bool {
        let t = self.truncation().min(other.truncation());
        let a = self.truncated(&t);
        let b = other.truncated(&t);
        a.den == b.den && a.terms == b.terms
    }
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in self.iter() {
            let (sign, body) = render_term(&e, c);
            if first {
                if sign < 0 {
                    write!(f, "-{body}")?;
                } else {
                    write!(f, "{body}")?;
                }
                first = false;
            } else if sign < 0 {
                write!(f, " - {body}")?;
            } else {
                write!(f, " + {body}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        let t = self.truncation();
        if t.is_integer() {
            write!(f, " + O(q^{})", t.numer())
        } else {
            write!(f, " + O(q^({}))", t)
        }
    }
}

fn render_term(e: &Rational, c: &GaussianRational) -> (i32, String) {
    // Pull a leading minus sign out of purely real/imaginary coefficients.
    let (sign, c) = if c.im.is_zero() && c.re.is_negative() || c.re.is_zero() && c.im.is_negative()
    {
        (-1, -c.clone())
    } else {
        (1, c.clone())
    };
    let coeff = if c == GaussianRational::one() {
        String::new()
    } else if c.is_real() || c.re.is_zero() {
        format!("{c}*")
    } else {
        format!("({c})*")
    };
    let body = if e.is_zero() {
        if coeff.is_empty() {
            "1".to_string()
        } else {
            coeff.trim_end_matches('*').to_string()
        }
    } else if e.is_integer() {
        if *e == rat(1) {
            format!("{coeff}q")
        } else {
            format!("{coeff}q^{}", e.numer())
        }
    } else {
        format!("{coeff}q^({e})")
    };
    (sign, body)
}

/// Serialization record: exponent-ascending list of `p/q` strings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct QSeriesWire {
    pub truncation: String,
    pub terms: Vec<QSeriesTermWire>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct QSeriesTermWire {
    pub exponent: String,
    pub re: String,
    pub im: String,
}

//! Multivariate polynomials over the Gaussian rationals, spherical
//! harmonics, and the primary states they induce.
//!
//! A spherical harmonic is a homogeneous polynomial in the orthonormal-frame
//! coordinates `x_1 .. x_d` annihilated by the Laplacian. Substituting
//! `x_i -> h_i(-1)` turns a degree-`k` harmonic into a weight-`k` primary
//! state of the Fock space, and the construction is double-checked through
//! the Virasoro conditions `L(1)v = L(2)v = 0`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::fock::{virasoro_l1, virasoro_l2, FockState, FockVector};
use crate::scalar::GaussianRational;

/// Sparse multivariate polynomial: exponent vectors over a fixed variable
/// count, Gaussian-rational coefficients, no zero terms stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Vec<u32>, GaussianRational>,
    nvars: usize,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            terms: BTreeMap::new(),
            nvars,
        }
    }

    pub fn constant(c: GaussianRational, nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(GaussianRational::one(), nvars)
    }

    /// The variable `x_{idx+1}` (0-based index).
    pub fn variable(idx: usize, nvars: usize) -> Self {
        assert!(idx < nvars, "variable index out of range");
        let mut exp = vec![0; nvars];
        exp[idx] = 1;
        let mut p = Self::zero(nvars);
        p.terms.insert(exp, GaussianRational::one());
        p
    }

    pub fn monomial(exp: Vec<u32>, c: GaussianRational, nvars: usize) -> Self {
        assert_eq!(exp.len(), nvars);
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &GaussianRational)> + '_ {
        self.terms.iter()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let slot = terms
                .entry(e.clone())
                .or_insert_with(GaussianRational::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(e);
            }
        }
        Poly {
            terms,
            nvars: self.nvars,
        }
    }

    pub fn scaled(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Poly {
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
            nvars: self.nvars,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scaled(&-GaussianRational::one()))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.nvars, rhs.nvars);
        let mut terms: BTreeMap<Vec<u32>, GaussianRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let prod = ca * cb;
                if prod.is_zero() {
                    continue;
                }
                let slot = terms.entry(e).or_insert_with(GaussianRational::zero);
                *slot += &prod;
                if slot.is_zero() {
                    terms.remove(&ea.iter().zip(eb).map(|(a, b)| a + b).collect::<Vec<u32>>());
                }
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly {
            terms,
            nvars: self.nvars,
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Total degree of the largest monomial, or `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// `Some(k)` when every monomial has total degree `k`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(|e| e.iter().sum::<u32>());
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Exact evaluation at a Gaussian-rational point.
    pub fn eval(&self, point: &[GaussianRational]) -> GaussianRational {
        assert_eq!(point.len(), self.nvars);
        let mut acc = GaussianRational::zero();
        for (e, c) in &self.terms {
            let mut m = c.clone();
            for (idx, &p) in e.iter().enumerate() {
                if p > 0 {
                    m *= &point[idx].pow(p);
                }
            }
            acc += &m;
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, p)| **p > 0)
                .map(|(i, p)| {
                    if *p == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, p)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// The Euclidean Laplacian `sum_i d^2/dx_i^2` in the orthonormal frame.
pub fn laplacian(p: &Poly) -> Poly {
    let mut out = Poly::zero(p.nvars());
    for (e, c) in p.iter() {
        for i in 0..p.nvars() {
            if e[i] >= 2 {
                let mut e2 = e.clone();
                e2[i] -= 2;
                let factor = GaussianRational::from_int((e[i] as i64) * (e[i] as i64 - 1));
                out = out.add(&Poly::monomial(e2, &factor * c, p.nvars()));
            }
        }
    }
    out
}

/// A homogeneous polynomial annihilated by the Laplacian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicPoly {
    poly: Poly,
    degree: u32,
}

impl HarmonicPoly {
    /// Check homogeneity and harmonicity.
    pub fn new(poly: Poly) -> Result<Self> {
        if poly.is_zero() {
            return Ok(HarmonicPoly { poly, degree: 0 });
        }
        let degree = poly.homogeneous_degree().ok_or(Error::NotHarmonic)?;
        if !laplacian(&poly).is_zero() {
            return Err(Error::NotHarmonic);
        }
        Ok(HarmonicPoly { poly, degree })
    }

    pub fn constant(nvars: usize) -> Self {
        HarmonicPoly {
            poly: Poly::one(nvars),
            degree: 0,
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars()
    }
}

/// The isotropic power `(t_1 x_1 + ... + t_d x_d)^k`, harmonic because
/// `sum t_i^2 = 0`. Degrees 0 and 1 need no isotropy.
pub fn isotropic_power(t: &[GaussianRational], k: u32) -> Result<HarmonicPoly> {
    let nvars = t.len();
    if k >= 2 {
        let mut sum = GaussianRational::zero();
        for ti in t {
            sum += &(ti * ti);
        }
        if !sum.is_zero() {
            return Err(Error::NotIsotropic);
        }
    }
    let mut linear = Poly::zero(nvars);
    for (i, ti) in t.iter().enumerate() {
        linear = linear.add(&Poly::variable(i, nvars).scaled(ti));
    }
    let poly = linear.pow(k);
    HarmonicPoly::new(poly)
}

/// The primary state `v_P = P(h_1(-1), ..., h_d(-1)) 1` of a degree-`k`
/// harmonic. The Virasoro conditions `L(1) v = L(2) v = 0` are re-verified
/// through explicit mode actions as a guard.
pub fn primary_state(p: &HarmonicPoly, rank: u32) -> Result<FockVector> {
    assert!(
        p.nvars() <= rank as usize,
        "harmonic uses more variables than the rank provides"
    );
    let mut v = FockVector::zero(rank);
    for (e, c) in p.poly().iter() {
        let mut parts: Vec<(u32, u32)> = Vec::new();
        for (idx, &count) in e.iter().enumerate() {
            for _ in 0..count {
                parts.push((idx as u32 + 1, 1));
            }
        }
        v = v.add(&FockVector::from_state(
            FockState::new(parts, rank),
            c.clone(),
        ));
    }
    let l1 = virasoro_l1(&v);
    if !l1.is_zero() {
        return Err(Error::InternalPrimaryCheckFailed(format!("L(1)v = {l1:?}")));
    }
    let l2 = virasoro_l2(&v);
    if !l2.is_zero() {
        return Err(Error::InternalPrimaryCheckFailed(format!("L(2)v = {l2:?}")));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::apply_mode;
    use crate::scalar::rat;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn laplacian_basics() {
        let x1 = Poly::variable(0, 2);
        let x2 = Poly::variable(1, 2);
        // x1^2 - x2^2 is harmonic
        let p = x1.mul(&x1).sub(&x2.mul(&x2));
        assert!(laplacian(&p).is_zero());
        // x1^2 has Laplacian 2
        let q = x1.mul(&x1);
        assert_eq!(laplacian(&q), Poly::constant(g(2), 2));
        // (t.x)^k picks up k(k-1)(sum t^2)(t.x)^{k-2}
        let t = [g(1), g(2)];
        let mut dot = Poly::zero(2);
        for (i, ti) in t.iter().enumerate() {
            dot = dot.add(&Poly::variable(i, 2).scaled(ti));
        }
        let k = 3u32;
        let lhs = laplacian(&dot.pow(k));
        let sum_sq = g(5);
        let rhs = dot.pow(k - 2).scaled(&(&g((k * (k - 1)) as i64) * &sum_sq));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn isotropic_powers() {
        // t = (1, i): x1^2 + 2i x1 x2 - x2^2
        let t = [g(1), GaussianRational::i()];
        let h = isotropic_power(&t, 2).unwrap();
        let p = h.poly();
        assert_eq!(p.eval(&[g(1), g(0)]), g(1));
        assert_eq!(p.eval(&[g(0), g(1)]), g(-1));
        assert_eq!(
            p.eval(&[g(1), g(1)]),
            &g(0) + &GaussianRational::new(rat(0), rat(2))
        );
        assert!(laplacian(p).is_zero());
        // degree 0 works for any t
        let h0 = isotropic_power(&[g(1), g(1)], 0).unwrap();
        assert_eq!(h0.degree(), 0);
        // non-isotropic direction fails at k >= 2
        assert!(matches!(
            isotropic_power(&[g(1), g(1)], 2),
            Err(Error::NotIsotropic)
        ));
    }

    #[test]
    fn harmonic_rejects_non_harmonic() {
        let x1 = Poly::variable(0, 2);
        assert!(matches!(
            HarmonicPoly::new(x1.mul(&x1)),
            Err(Error::NotHarmonic)
        ));
        // mixed degrees rejected as well
        let mixed = x1.add(&Poly::one(2));
        assert!(matches!(HarmonicPoly::new(mixed), Err(Error::NotHarmonic)));
    }

    #[test]
    fn primary_states() {
        // x1 -> h1(-1) vac
        let h = HarmonicPoly::new(Poly::variable(0, 1)).unwrap();
        let v = primary_state(&h, 1).unwrap();
        assert_eq!(v.coeff(&FockState::new(vec![(1, 1)], 1)), g(1));
        // x1^2 - x2^2 -> (h1(-1)^2 - h2(-1)^2) vac, primary
        let x1 = Poly::variable(0, 2);
        let x2 = Poly::variable(1, 2);
        let h = HarmonicPoly::new(x1.mul(&x1).sub(&x2.mul(&x2))).unwrap();
        let v = primary_state(&h, 2).unwrap();
        assert_eq!(v.coeff(&FockState::new(vec![(1, 1), (1, 1)], 2)), g(1));
        assert_eq!(v.coeff(&FockState::new(vec![(2, 1), (2, 1)], 2)), g(-1));
        assert!(virasoro_l1(&v).is_zero());
        assert!(virasoro_l2(&v).is_zero());
    }

    #[test]
    fn quasiprimary_holds_for_any_mode_one_polynomial() {
        // L(1) kills every polynomial in the h_i(-1), harmonic or not.
        let rank = 2;
        for degree in 0..=4u32 {
            for split in 0..=degree {
                let mut parts = Vec::new();
                for _ in 0..split {
                    parts.push((1, 1));
                }
                for _ in 0..(degree - split) {
                    parts.push((2, 1));
                }
                let v = FockVector::from_state(FockState::new(parts, rank), g(3));
                assert!(virasoro_l1(&v).is_zero(), "degree {degree} split {split}");
            }
        }
    }

    #[test]
    fn l2_detects_non_harmonic_substitution() {
        // (1/2) h1(1)^2 applied to h1(-1)^2 vac leaves the vacuum: L(2) != 0.
        let v = FockVector::from_state(FockState::new(vec![(1, 1), (1, 1)], 1), g(1));
        let l2 = virasoro_l2(&v);
        assert_eq!(l2.coeff(&FockState::vacuum(1)), g(1));
        // and the guard inside primary_state cannot be reached through
        // HarmonicPoly, which rejects x1^2 outright.
    }

    #[test]
    fn virasoro_l1_l2_lower_weights_correctly() {
        // L(1) maps weight n to n-1, L(2) to n-2, on a mixed-mode state.
        let v = FockVector::from_state(FockState::new(vec![(1, 2), (1, 1)], 1), g(1));
        let l1 = virasoro_l1(&v);
        // L(1) h1(-2)h1(-1) vac = 2 h1(-1)^2 vac  (from h1(-1)h1(1) + h1(0).. terms)
        let expected = apply_mode(1, -1, &apply_mode(1, -1, &FockVector::vacuum(1)));
        assert_eq!(l1, expected.scaled(&g(2)));
        let l2 = virasoro_l2(&v);
        // L(2) h1(-2)h1(-1) vac = 0: the only surviving contraction lands in
        // h1(0)(..) which annihilates.
        assert!(l2.is_zero());
    }
}

//! Exact enumeration of short vectors in a coset `L + lambda`.
//!
//! The Gram matrix is decomposed as `Q(x) = sum_i D_i (x_i + sum_{j>i} U_ij x_j)^2`
//! over exact rationals, and the usual recursive descent runs entirely in
//! integer arithmetic after clearing denominators. Candidate ranges come
//! from integer square roots padded by one and every candidate is re-checked
//! exactly, so no vector is ever missed or wrongly included. The inner loop
//! uses `i128` when a precomputed worst-case bound allows it, otherwise big
//! integers; both paths visit vectors in the same deterministic order.

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::Rational;

use super::{CosetRep, Lattice};

/// Exact Lagrange decomposition of a symmetric positive-definite matrix:
/// `Q(x) = sum_i diag[i] (x_i + sum_{j>i} upper[i][j] x_j)^2`.
pub(crate) struct Decomposition {
    pub diag: Vec<Rational>,
    pub upper: Vec<Vec<Rational>>,
}

pub(crate) fn cholesky(gram: &[Vec<i64>]) -> Result<Decomposition> {
    let n = gram.len();
    let mut a: Vec<Vec<Rational>> = gram
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| Rational::from_integer(BigInt::from(*v)))
                .collect()
        })
        .collect();
    let mut diag = Vec::with_capacity(n);
    let mut upper = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        let d = a[i][i].clone();
        if !d.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        for j in (i + 1)..n {
            upper[i][j] = &a[i][j] / &d;
        }
        for j in (i + 1)..n {
            for k in (i + 1)..n {
                let delta = &a[i][j] * &a[i][k] / &d;
                a[j][k] -= delta;
            }
        }
        diag.push(d);
    }
    Ok(Decomposition { diag, upper })
}

/// Integer arithmetic abstraction so the descent can run in `i128` or
/// `BigInt` with identical behavior.
trait Int: Clone + Ord {
    fn zero_val() -> Self;
    fn from_big(v: &BigInt) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    fn div_floor_int(&self, o: &Self) -> Self;
    fn isqrt(&self) -> Self;
    fn as_i64(&self) -> i64;
    fn is_negative_int(&self) -> bool;
}

impl Int for i128 {
    fn zero_val() -> Self {
        0
    }
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("value fits i128")
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * k as i128
    }
    fn div_floor_int(&self, o: &Self) -> Self {
        self.div_floor(o)
    }
    fn isqrt(&self) -> Self {
        debug_assert!(*self >= 0);
        Roots::sqrt(self)
    }
    fn as_i64(&self) -> i64 {
        (*self).try_into().expect("value fits i64")
    }
    fn is_negative_int(&self) -> bool {
        *self < 0
    }
}

impl Int for BigInt {
    fn zero_val() -> Self {
        Zero::zero()
    }
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn mul_i64(&self, k: i64) -> Self {
        self * BigInt::from(k)
    }
    fn div_floor_int(&self, o: &Self) -> Self {
        Integer::div_floor(self, o)
    }
    fn isqrt(&self) -> Self {
        debug_assert!(!self.is_negative());
        Roots::sqrt(self)
    }
    fn as_i64(&self) -> i64 {
        ToPrimitive::to_i64(self).expect("value fits i64")
    }
    fn is_negative_int(&self) -> bool {
        self.is_negative()
    }
}

/// Scaled integer data shared by both descent instantiations.
struct Plan {
    rank: usize,
    /// common denominator of the decomposition entries
    lambda: BigInt,
    /// diag[i] * lambda
    dn: Vec<BigInt>,
    /// upper[i][j] * lambda
    un: Vec<Vec<BigInt>>,
    /// coset denominator
    dl: i64,
    /// scaled shift residues: y_i must be congruent to l_i mod dl
    residues: Vec<i64>,
    /// top budget: 2 * bound * dl^2 * lambda^3 * bden, over bden
    r_top: BigInt,
    bden: BigInt,
}

fn build_plan(lattice: &Lattice, coset: &CosetRep, bound: &Rational) -> Result<Plan> {
    let rank = lattice.rank();
    let chol = cholesky(lattice.gram())?;
    let mut lambda = BigInt::one();
    for d in &chol.diag {
        lambda = lambda.lcm(d.denom());
    }
    for row in &chol.upper {
        for u in row {
            lambda = lambda.lcm(u.denom());
        }
    }
    let dn: Vec<BigInt> = chol
        .diag
        .iter()
        .map(|d| (d * Rational::from_integer(lambda.clone())).to_integer())
        .collect();
    let un: Vec<Vec<BigInt>> = chol
        .upper
        .iter()
        .map(|row| {
            row.iter()
                .map(|u| (u * Rational::from_integer(lambda.clone())).to_integer())
                .collect()
        })
        .collect();
    let dl = coset.denominator();
    let residues: Vec<i64> = coset
        .shift()
        .iter()
        .map(|s| {
            let scaled = s * Rational::from_integer(BigInt::from(dl));
            debug_assert!(scaled.is_integer());
            scaled
                .to_integer()
                .to_i64()
                .expect("shift numerator fits i64")
        })
        .collect();
    // R_top / bden = 2 * bound * dl^2 * lambda^3
    let b2 = bound * Rational::from_integer(BigInt::from(2) * BigInt::from(dl) * BigInt::from(dl));
    let bden = b2.denom().clone();
    let r_top = b2.numer() * &lambda * &lambda * &lambda;
    Ok(Plan {
        rank,
        lambda,
        dn,
        un,
        dl,
        residues,
        r_top,
        bden,
    })
}

impl Plan {
    /// Worst-case magnitude of any intermediate in the descent, used to pick
    /// the integer width.
    fn peak_estimate(&self) -> BigInt {
        if self.r_top.is_negative() {
            return BigInt::zero();
        }
        let mut y_max = BigInt::one();
        for dn in &self.dn {
            let q = &self.r_top / (dn * &self.bden);
            let t = q.sqrt() + 1;
            let candidate = Integer::div_floor(&t, &self.lambda) + 2;
            if candidate > y_max {
                y_max = candidate;
            }
        }
        let mut u_abs_max = BigInt::one();
        for row in &self.un {
            let s: BigInt = row
                .iter()
                .map(|u| BigInt::from(u.magnitude().to_owned()))
                .sum();
            if s > u_abs_max {
                u_abs_max = s;
            }
        }
        let w_max = &self.lambda * &y_max + &u_abs_max * &y_max * BigInt::from(self.rank as i64);
        let dn_max = self.dn.iter().max().cloned().unwrap_or_else(BigInt::one);
        (dn_max * &w_max * &w_max * &self.bden).max(self.r_top.clone())
    }
}

fn descend<T: Int>(plan: &Plan, canonical_only: bool, visit: &mut dyn FnMut(&[i64])) {
    let rank = plan.rank;
    let dn: Vec<T> = plan.dn.iter().map(|v| T::from_big(v)).collect();
    let un: Vec<Vec<T>> = plan
        .un
        .iter()
        .map(|row| row.iter().map(|v| T::from_big(v)).collect())
        .collect();
    let bden = T::from_big(&plan.bden);
    let r_top = T::from_big(&plan.r_top);
    let lambda = T::from_big(&plan.lambda);
    let mut y = vec![0i64; rank];

    // Depth-first from the last coordinate; ranges are exact-checked. With
    // `prefix_zero` set, only the representative of each {alpha, -alpha}
    // pair is visited: the first nonzero coordinate must be positive.
    #[allow(clippy::too_many_arguments)]
    fn level<T: Int>(
        i: usize,
        remaining: &T,
        prefix_zero: bool,
        y: &mut Vec<i64>,
        dn: &[T],
        un: &[Vec<T>],
        bden: &T,
        lambda: &T,
        dl: i64,
        residues: &[i64],
        visit: &mut dyn FnMut(&[i64]),
    ) {
        // center numerator s = sum_{j>i} un[i][j] * y_j
        let mut s = T::zero_val();
        for j in (i + 1)..y.len() {
            if y[j] != 0 {
                s = s.add(&un[i][j].mul_i64(y[j]));
            }
        }
        // |lambda*y + s| <= tb + 1 with tb = isqrt(remaining / (dn_i * bden))
        let denom = dn[i].mul(bden);
        let quot = remaining.div_floor_int(&denom);
        if quot.is_negative_int() {
            return;
        }
        let tb = quot.isqrt();
        let lo_num = s.mul_i64(-1).sub(&tb).sub(&one_t::<T>());
        let hi_num = s.mul_i64(-1).add(&tb).add(&one_t::<T>());
        let mut y_lo = lo_num.div_floor_int(lambda).as_i64();
        let y_hi = hi_num.div_floor_int(lambda).as_i64() + 1;
        if prefix_zero && y_lo < 0 {
            y_lo = 0;
        }
        // align to the coset residue class modulo dl
        let r = residues[i].rem_euclid(dl);
        let offset = (r - y_lo.rem_euclid(dl)).rem_euclid(dl);
        y_lo += offset;
        let mut yi = y_lo;
        while yi <= y_hi {
            let w = lambda.mul_i64(yi).add(&s);
            let used = dn[i].mul(&w).mul(&w).mul(bden);
            if used <= *remaining {
                y[i] = yi;
                if i == 0 {
                    visit(y);
                } else {
                    let next = remaining.sub(&used);
                    level(
                        i - 1,
                        &next,
                        prefix_zero && yi == 0,
                        y,
                        dn,
                        un,
                        bden,
                        lambda,
                        dl,
                        residues,
                        visit,
                    );
                }
                y[i] = 0;
            }
            yi += dl;
        }
    }

    fn one_t<T: Int>() -> T {
        T::from_big(&BigInt::one())
    }

    if r_top.is_negative_int() {
        return;
    }
    level(
        rank - 1,
        &r_top,
        canonical_only,
        &mut y,
        &dn,
        &un,
        &bden,
        &lambda,
        plan.dl,
        &plan.residues,
        visit,
    );
}

/// Stream every vector of `L + lambda` with `(alpha, alpha)/2 <= bound` to
/// the callback as `(scaled_coords, scaled_norm)`: true coordinates are
/// `scaled_coords / coset_den` and `(alpha, alpha) = scaled_norm / coset_den^2`.
/// Deterministic order, exact arithmetic throughout.
pub(crate) fn enumerate_stream(
    lattice: &Lattice,
    coset: &CosetRep,
    bound: &Rational,
    visit: impl FnMut(&[i64], i64),
) -> Result<()> {
    enumerate_impl(lattice, coset, bound, false, visit)
}

/// Like [`enumerate_stream`], but visits only one representative of each
/// `{alpha, -alpha}` pair (the one whose first nonzero scaled coordinate,
/// scanning from the last, is positive). The zero vector, when present, is
/// visited once. Only valid on cosets with `-lambda = lambda` mod `L`.
pub(crate) fn enumerate_stream_canonical(
    lattice: &Lattice,
    coset: &CosetRep,
    bound: &Rational,
    visit: impl FnMut(&[i64], i64),
) -> Result<()> {
    debug_assert!(coset_is_symmetric(coset));
    enumerate_impl(lattice, coset, bound, true, visit)
}

/// True when `2 lambda` is integral, i.e. the coset is fixed by negation.
pub(crate) fn coset_is_symmetric(coset: &CosetRep) -> bool {
    coset
        .shift()
        .iter()
        .all(|c| (c * Rational::from_integer(BigInt::from(2))).is_integer())
}

fn enumerate_impl(
    lattice: &Lattice,
    coset: &CosetRep,
    bound: &Rational,
    canonical_only: bool,
    mut visit: impl FnMut(&[i64], i64),
) -> Result<()> {
    if bound.is_negative() {
        return Ok(());
    }
    let plan = build_plan(lattice, coset, bound)?;
    let gram = lattice.gram();
    let mut emit = |y: &[i64]| {
        let mut norm: i128 = 0;
        for (i, yi) in y.iter().enumerate() {
            if *yi == 0 {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                if *yj != 0 {
                    norm += (*yi as i128) * (gram[i][j] as i128) * (*yj as i128);
                }
            }
        }
        visit(y, norm.try_into().expect("norm fits i64"));
    };
    let threshold = BigInt::from(i128::MAX / 16);
    if plan.peak_estimate() < threshold {
        descend::<i128>(&plan, canonical_only, &mut emit);
    } else {
        descend::<BigInt>(&plan, canonical_only, &mut emit);
    }
    Ok(())
}

/// All vectors `alpha` of `L + lambda` with `(alpha, alpha)/2 <= bound`, as
/// rational coordinate vectors in deterministic order.
pub fn enumerate_vectors(
    lattice: &Lattice,
    coset: &CosetRep,
    bound: &Rational,
) -> Result<Vec<Vec<Rational>>> {
    let dl = coset.denominator();
    let mut out = Vec::new();
    enumerate_stream(lattice, coset, bound, |y, _norm| {
        out.push(
            y.iter()
                .map(|v| Rational::new(BigInt::from(*v), BigInt::from(dl)))
                .collect(),
        );
    })?;
    Ok(out)
}

//! Eisenstein series, eta powers, and the quasi-modular ring `C[E2,E4,E6]`.
//!
//! Eisenstein series are normalized with constant term `-B_{2k}/(2k)!` and
//! q-coefficients `(2/(2k-1)!) sigma_{2k-1}(n)`, so that e.g.
//! `E2 = -1/12 + 2q + 6q^2 + ...`. Higher Eisenstein series are rewritten
//! into the generators `E4`, `E6` by an exact linear solve against the
//! monomial basis of the given weight ([`reduce_e2k`]), and q-expansions with
//! integer exponents can be decomposed back into quasi-modular polynomials by
//! an overdetermined exact solve ([`qm_from_series`]).

// Indexed loops over small matrices are clearer here than iterator chains.
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::scalar::{factorial, parse_rational, rat, ratio, GaussianRational, Rational};

/// Write-once growing table of Bernoulli numbers `B_0, B_1, B_2, ...`,
/// computed by the standard recurrence over exact rationals. Safe for
/// concurrent readers.
pub struct BernoulliCache {
    values: RwLock<Vec<Rational>>,
}

impl BernoulliCache {
    pub fn new() -> Self {
        BernoulliCache {
            values: RwLock::new(vec![Rational::one()]),
        }
    }

    /// `B_n` (convention `B_1 = -1/2`; only even indices are used here).
    pub fn bernoulli(&self, n: usize) -> Rational {
        {
            let values = self.values.read().expect("bernoulli cache poisoned");
            if n < values.len() {
                return values[n].clone();
            }
        }
        let mut values = self.values.write().expect("bernoulli cache poisoned");
        while values.len() <= n {
            let m = values.len();
            // sum_{j=0}^{m} binom(m+1, j) B_j = 0 for m >= 1
            let mut acc = Rational::zero();
            for (j, b) in values.iter().enumerate() {
                let c = crate::scalar::binomial((m + 1) as i64, j as u64);
                acc += Rational::from_integer(c) * b;
            }
            let next = -acc / Rational::from_integer(BigInt::from(m + 1));
            values.push(next);
        }
        values[n].clone()
    }

    /// `B_{2k}`, checked even.
    pub fn even_bernoulli(&self, two_k: u64) -> Rational {
        debug_assert!(two_k.is_multiple_of(2));
        self.bernoulli(two_k as usize)
    }
}

impl Default for BernoulliCache {
    fn default() -> Self {
        Self::new()
    }
}

fn shared_bernoulli() -> &'static BernoulliCache {
    static CACHE: std::sync::OnceLock<BernoulliCache> = std::sync::OnceLock::new();
    CACHE.get_or_init(BernoulliCache::new)
}

/// Sum of the `k`-th powers of the divisors of `n >= 1`.
fn sigma(k: u32, n: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for d in 1..=n {
        if n.is_multiple_of(d) {
            acc += BigInt::from(d).pow(k);
        }
    }
    acc
}

/// The Eisenstein series `E_{2k}` as an exact q-expansion below `t`.
///
/// `E_{2k} = -B_{2k}/(2k)! + (2/(2k-1)!) sum_{n>=1} sigma_{2k-1}(n) q^n`.
pub fn eisenstein(two_k: i64, t: &Rational) -> Result<QSeries> {
    if two_k < 2 || two_k % 2 != 0 {
        return Err(Error::BadWeight(two_k));
    }
    let w = two_k as u64;
    let constant = -shared_bernoulli().even_bernoulli(w) / Rational::from_integer(factorial(w));
    let scale = ratio(2, 1) / Rational::from_integer(factorial(w - 1));
    let mut terms = vec![(Rational::zero(), GaussianRational::from_rational(constant))];
    let mut n = 1u64;
    while rat(n as i64) < *t {
        let c = Rational::from_integer(sigma(w as u32 - 1, n)) * &scale;
        terms.push((rat(n as i64), GaussianRational::from_rational(c)));
        n += 1;
    }
    Ok(QSeries::from_terms(terms, t))
}

/// `eta(q)^d = q^{d/24} (prod_{n>=1} (1 - q^n))^d`, exact below `t`.
///
/// The Euler product is expanded by the pentagonal number theorem and then
/// raised to the `d`-th power (inverting once for negative `d`).
pub fn eta_power(d: i64, t: &Rational) -> QSeries {
    let shift = ratio(d, 24);
    if d == 0 {
        return QSeries::one(t);
    }
    let window = t - &shift;
    if window <= Rational::zero() {
        return QSeries::zero(t);
    }
    let mut terms = Vec::new();
    let mut k: i64 = 0;
    loop {
        // generalized pentagonal numbers k(3k-1)/2 for k = 0, 1, -1, 2, -2, ...
        let mut pushed = false;
        for kk in [k, -k] {
            let e = rat(kk * (3 * kk - 1) / 2);
            if e < window {
                let sign = if kk.rem_euclid(2) == 0 { 1 } else { -1 };
                terms.push((e, GaussianRational::from_int(sign)));
                pushed = true;
            }
            if kk == 0 {
                break;
            }
        }
        if !pushed && k > 0 {
            break;
        }
        k += 1;
    }
    let euler = QSeries::from_terms(terms, &window);
    let powered = euler.pow(d).expect("euler product has unit constant term");
    powered.truncated(&window).shifted(&shift)
}

/// Exponent triple `(i, j, k)`: degrees in `E2`, `E4`, `E6`. The weight of
/// the monomial is `2i + 4j + 6k`.
pub type QmExponent = (u32, u32, u32);

/// Polynomial in the generators `E2, E4, E6` with Gaussian-rational
/// coefficients; the canonical house for quasi-modular trace results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiModular {
    terms: BTreeMap<QmExponent, GaussianRational>,
}

impl QuasiModular {
    pub fn zero() -> Self {
        QuasiModular {
            terms: BTreeMap::new(),
        }
    }

    pub fn one() -> Self {
        Self::monomial((0, 0, 0), GaussianRational::one())
    }

    pub fn e2() -> Self {
        Self::monomial((1, 0, 0), GaussianRational::one())
    }

    pub fn e4() -> Self {
        Self::monomial((0, 1, 0), GaussianRational::one())
    }

    pub fn e6() -> Self {
        Self::monomial((0, 0, 1), GaussianRational::one())
    }

    pub fn monomial(exp: QmExponent, coeff: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        QuasiModular { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: QmExponent) -> GaussianRational {
        self.terms
            .get(&exp)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (QmExponent, &GaussianRational)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    /// Weight `2i + 4j + 6k` of a monomial.
    pub fn monomial_weight(exp: QmExponent) -> u32 {
        2 * exp.0 + 4 * exp.1 + 6 * exp.2
    }

    /// Largest weight over stored terms; `None` for the zero polynomial.
    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(|e| Self::monomial_weight(*e)).max()
    }

    /// Largest `E2`-degree over stored terms; `None` for zero.
    pub fn max_e2_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.0).max()
    }

    /// True when every monomial has the same weight `w`.
    pub fn is_homogeneous_of_weight(&self, w: u32) -> bool {
        self.terms.keys().all(|e| Self::monomial_weight(*e) == w)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let slot = terms.entry(*e).or_insert_with(GaussianRational::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(e);
            }
        }
        QuasiModular { terms }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scaled(&(-GaussianRational::one())))
    }

    pub fn scaled(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        let terms = self.terms.iter().map(|(e, v)| (*e, v * c)).collect();
        QuasiModular { terms }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut terms: BTreeMap<QmExponent, GaussianRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e = (ea.0 + eb.0, ea.1 + eb.1, ea.2 + eb.2);
                let prod = ca * cb;
                if prod.is_zero() {
                    continue;
                }
                let slot = terms.entry(e).or_insert_with(GaussianRational::zero);
                *slot += &prod;
                if slot.is_zero() {
                    terms.remove(&e);
                }
            }
        }
        QuasiModular { terms }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// JSON wire form: records sorted lexicographically by `(e2, e4, e6)`.
    pub fn to_wire(&self) -> Vec<QuasiModularTermWire> {
        self.terms
            .iter()
            .map(|(e, c)| {
                let (re, im) = c.render_pair();
                QuasiModularTermWire {
                    e2: e.0,
                    e4: e.1,
                    e6: e.2,
                    re,
                    im,
                }
            })
            .collect()
    }

    pub fn from_wire(wire: &[QuasiModularTermWire]) -> Result<Self> {
        let mut acc = Self::zero();
        for t in wire {
            let c = GaussianRational::new(parse_rational(&t.re)?, parse_rational(&t.im)?);
            acc = acc.add(&Self::monomial((t.e2, t.e4, t.e6), c));
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct QuasiModularTermWire {
    pub e2: u32,
    pub e4: u32,
    pub e6: u32,
    pub re: String,
    pub im: String,
}

impl fmt::Display for QuasiModular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (exp, c) in self.iter() {
            let (sign, c) = if c.is_real() && c.re.is_negative() {
                ("-", -c.clone())
            } else {
                ("+", c.clone())
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if exp == (0, 0, 0) || c != GaussianRational::one() {
                if c.is_real() || c.re.is_zero() {
                    parts.push(format!("{c}"));
                } else {
                    parts.push(format!("({c})"));
                }
            }
            for (name, deg) in [("E2", exp.0), ("E4", exp.1), ("E6", exp.2)] {
                if deg == 1 {
                    parts.push(name.to_string());
                } else if deg > 1 {
                    parts.push(format!("{name}^{deg}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Expand a quasi-modular polynomial into its exact q-expansion below `t`.
pub fn qm_to_series(p: &QuasiModular, t: &Rational) -> QSeries {
    if p.is_zero() {
        return QSeries::zero(t);
    }
    let e2 = eisenstein(2, t).expect("weight 2 valid");
    let e4 = eisenstein(4, t).expect("weight 4 valid");
    let e6 = eisenstein(6, t).expect("weight 6 valid");
    // Cache generator powers as we walk the (sorted) monomials.
    let mut pow_cache: BTreeMap<QmExponent, QSeries> = BTreeMap::new();
    let mut acc = QSeries::zero(t);
    for (exp, c) in p.iter() {
        let series = monomial_series(exp, &e2, &e4, &e6, t, &mut pow_cache);
        acc = acc.add(&series.scaled(c));
    }
    acc
}

fn monomial_series(
    exp: QmExponent,
    e2: &QSeries,
    e4: &QSeries,
    e6: &QSeries,
    t: &Rational,
    cache: &mut BTreeMap<QmExponent, QSeries>,
) -> QSeries {
    if let Some(s) = cache.get(&exp) {
        return s.clone();
    }
    let s = if exp == (0, 0, 0) {
        QSeries::one(t)
    } else if exp.0 > 0 {
        monomial_series((exp.0 - 1, exp.1, exp.2), e2, e4, e6, t, cache)
            .mul(e2)
            .truncated(t)
    } else if exp.1 > 0 {
        monomial_series((exp.0, exp.1 - 1, exp.2), e2, e4, e6, t, cache)
            .mul(e4)
            .truncated(t)
    } else {
        monomial_series((exp.0, exp.1, exp.2 - 1), e2, e4, e6, t, cache)
            .mul(e6)
            .truncated(t)
    };
    cache.insert(exp, s.clone());
    s
}

/// Rewrite `E_{2k}` (for `2k >= 4`) as the unique weight-`2k` polynomial in
/// `E4` and `E6` alone, by an exact linear solve on q-expansion coefficients.
pub fn reduce_e2k(two_k: i64) -> Result<QuasiModular> {
    if two_k < 4 || two_k % 2 != 0 {
        return Err(Error::BadWeight(two_k));
    }
    let basis = weight_basis_e4_e6(two_k as u32);
    let dim = basis.len();
    let rows = dim + 12;
    let t = rat(rows as i64);
    let target = eisenstein(two_k, &t)?;
    let columns: Vec<QSeries> = basis
        .iter()
        .map(|exp| qm_to_series(&QuasiModular::monomial(*exp, GaussianRational::one()), &t))
        .collect();
    let solution = solve_exact(&columns, &target, rows).map_err(|_| Error::SolveFailed(two_k))?;
    let mut acc = QuasiModular::zero();
    for (exp, c) in basis.into_iter().zip(solution) {
        acc = acc.add(&QuasiModular::monomial(exp, c));
    }
    Ok(acc)
}

/// Monomials `E4^a E6^b` of exact weight `w`, in deterministic order.
fn weight_basis_e4_e6(w: u32) -> Vec<QmExponent> {
    let mut out = Vec::new();
    for a in 0..=(w / 4) {
        let rem = w - 4 * a;
        if rem.is_multiple_of(6) {
            out.push((0, a, rem / 6));
        }
    }
    out
}

/// Decompose a q-expansion with non-negative integer exponents as a
/// quasi-modular polynomial of weight components `<= max_weight`.
///
/// The solve is overdetermined: at least `dim + 5` exact coefficients must be
/// available, and every available coefficient must match. Uniqueness follows
/// from the algebraic independence of `E2, E4, E6`.
pub fn qm_from_series(s: &QSeries, max_weight: u32) -> Result<QuasiModular> {
    for (e, _) in s.iter() {
        if !e.is_integer() || e.is_negative() {
            return Err(Error::NotInRing(format!(
                "exponent {e} is not a non-negative integer"
            )));
        }
    }
    let basis = weight_basis_all(max_weight);
    let dim = basis.len();
    let t = s.truncation();
    let available = if t.is_positive() {
        t.ceil().to_integer().to_i64().unwrap_or(0).max(0) as usize
    } else {
        0
    };
    let need = dim + 5;
    if available < need {
        return Err(Error::InsufficientPrecision {
            need,
            have: available,
        });
    }
    let horizon = rat(available as i64);
    let columns = decomposition_columns(max_weight, available, &basis, &horizon);
    let solution = solve_exact(&columns, s, available).map_err(Error::NotInRing)?;
    let mut acc = QuasiModular::zero();
    for (exp, c) in basis.into_iter().zip(solution) {
        acc = acc.add(&QuasiModular::monomial(exp, c));
    }
    Ok(acc)
}

/// Basis q-expansions reused across decompositions at the same weight cap
/// and precision (write-once per key).
fn decomposition_columns(
    max_weight: u32,
    available: usize,
    basis: &[QmExponent],
    horizon: &Rational,
) -> std::sync::Arc<Vec<QSeries>> {
    type Key = (u32, usize);
    static CACHE: std::sync::OnceLock<
        RwLock<std::collections::HashMap<Key, std::sync::Arc<Vec<QSeries>>>>,
    > = std::sync::OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(std::collections::HashMap::new()));
    let key = (max_weight, available);
    if let Some(hit) = cache.read().expect("column cache poisoned").get(&key) {
        return hit.clone();
    }
    let columns: Vec<QSeries> = basis
        .iter()
        .map(|exp| {
            qm_to_series(
                &QuasiModular::monomial(*exp, GaussianRational::one()),
                horizon,
            )
        })
        .collect();
    cache
        .write()
        .expect("column cache poisoned")
        .entry(key)
        .or_insert(std::sync::Arc::new(columns))
        .clone()
}

/// All monomials `(i, j, k)` of weight `2i + 4j + 6k <= max_weight`, sorted.
fn weight_basis_all(max_weight: u32) -> Vec<QmExponent> {
    let mut out = Vec::new();
    for i in 0..=(max_weight / 2) {
        for j in 0..=((max_weight - 2 * i) / 4) {
            for k in 0..=((max_weight - 2 * i - 4 * j) / 6) {
                out.push((i, j, k));
            }
        }
    }
    out.sort();
    out
}

/// Exact solve: find `x` with `sum_j x_j col_j = target` on the integer
/// coefficients `q^0 .. q^{rows-1}`; every row must be satisfied.
fn solve_exact(
    columns: &[QSeries],
    target: &QSeries,
    rows: usize,
) -> std::result::Result<Vec<GaussianRational>, String> {
    let dim = columns.len();
    let mut matrix: Vec<Vec<GaussianRational>> = Vec::with_capacity(rows);
    for n in 0..rows {
        let e = rat(n as i64);
        let mut row: Vec<GaussianRational> = Vec::with_capacity(dim + 1);
        for col in columns {
            row.push(
                col.coeff(&e)
                    .ok_or_else(|| format!("column not exact at q^{n}"))?,
            );
        }
        row.push(
            target
                .coeff(&e)
                .ok_or_else(|| format!("target not exact at q^{n}"))?,
        );
        matrix.push(row);
    }
    // Exact Gauss-Jordan over the Gaussian rationals.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; dim];
    let mut pivot_row = 0usize;
    for col in 0..dim {
        let found = (pivot_row..rows).find(|r| !matrix[*r][col].is_zero());
        let Some(r) = found else { continue };
        matrix.swap(pivot_row, r);
        let inv = matrix[pivot_row][col].inv().expect("pivot nonzero");
        for v in matrix[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for rr in 0..rows {
            if rr != pivot_row && !matrix[rr][col].is_zero() {
                let f = matrix[rr][col].clone();
                for cc in 0..=dim {
                    let delta = &f * &matrix[pivot_row][cc];
                    matrix[rr][cc] -= &delta;
                }
            }
        }
        pivot_of_col[col] = Some(pivot_row);
        pivot_row += 1;
        if pivot_row == rows {
            break;
        }
    }
    // Inconsistent rows: all coefficients eliminated but nonzero rhs.
    for r in 0..rows {
        if matrix[r][..dim].iter().all(|v| v.is_zero()) && !matrix[r][dim].is_zero() {
            return Err(format!("inconsistent at row {r}"));
        }
    }
    let mut solution = vec![GaussianRational::zero(); dim];
    for col in 0..dim {
        if let Some(r) = pivot_of_col[col] {
            solution[col] = matrix[r][dim].clone();
        }
        // Free columns stay zero; with overdetermined consistent systems and
        // independent generators this does not occur.
    }
    Ok(solution)
}

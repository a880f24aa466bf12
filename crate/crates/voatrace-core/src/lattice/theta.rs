//! Theta series of a coset: plain, pairing-weighted, and harmonic.
//!
//! All three reduce to one enumeration sweep that accumulates, per norm
//! bucket, integer sums of frame-coordinate monomials. Frame coordinates of
//! an enumerated vector are integers over `den * coset_den * sqrt(sigma)`,
//! so a degree-`t` monomial sum folds into an exact rational (or exposes a
//! genuinely irrational odd-degree remainder, which only happens on cosets
//! without the `alpha <-> -alpha` symmetry when `sigma` is not a square).
//! The inner loop runs in `i128` when precomputed bounds allow and falls
//! back to big integers otherwise.

// Indexed loops over small matrices are clearer here than iterator chains.
#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::scalar::{GaussianRational, Rational};

use super::enumerate::{coset_is_symmetric, enumerate_stream, enumerate_stream_canonical};
use super::poly::HarmonicPoly;
use super::{CosetRep, FrameScale, Lattice};

/// Accumulator that stays in `i128` until it would overflow.
#[derive(Debug, Clone, Default)]
pub(crate) struct SpillAcc {
    small: i128,
    big: BigInt,
}

impl SpillAcc {
    pub(crate) fn add(&mut self, v: i128) {
        match self.small.checked_add(v) {
            Some(s) => self.small = s,
            None => {
                self.big += BigInt::from(self.small);
                self.small = v;
            }
        }
    }

    pub(crate) fn total(&self) -> BigInt {
        &self.big + BigInt::from(self.small)
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.small == 0 && self.big.is_zero()
    }
}

/// Per-lattice frame data prepared for a sweep.
struct SweepFrame {
    /// i64 copy of the embedding numerators (row per basis vector)
    num: Vec<Vec<i64>>,
    scale: FrameScale,
}

fn sweep_frame(lattice: &Lattice, coset_den: i64) -> Result<SweepFrame> {
    let emb = lattice.embedding().ok_or(Error::NoEmbedding)?;
    let num = emb
        .num_rows()
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| v.to_i64().ok_or(Error::IrrationalValue))
                .collect::<Result<Vec<i64>>>()
        })
        .collect::<Result<Vec<Vec<i64>>>>()?;
    let mut scale = FrameScale::of(lattice)?;
    scale.den *= BigInt::from(coset_den);
    Ok(SweepFrame { num, scale })
}

/// Largest norm-grid value strictly below the window: norm exponents live
/// in `Z / (2 dl^2)`, so enumerating past this bound is wasted work.
pub(crate) fn effective_bound(window: &Rational, dl: i64) -> Rational {
    let scale = BigInt::from(2 * dl * dl);
    let scaled = window * Rational::from_integer(scale.clone());
    let top = scaled.ceil().to_integer() - 1;
    Rational::new(top, scale)
}

/// Monomial sums over a coset: for each exponent tuple `t`, the map
/// `scaled norm -> sum over vectors of prod_i F_i^{t_i}` with `F` the scaled
/// integer frame numerators. The scaled norm is `(alpha, alpha) * coset_den^2`.
pub(crate) fn multi_weighted_sums(
    lattice: &Lattice,
    coset: &CosetRep,
    bound: &Rational,
    tuples: &[Vec<u32>],
) -> Result<Vec<BTreeMap<i64, BigInt>>> {
    let rank = lattice.rank();
    for t in tuples {
        assert_eq!(t.len(), rank, "tuple length must match rank");
    }
    let needs_frame = tuples.iter().any(|t| t.iter().any(|e| *e > 0));
    let dl = coset.denominator();
    let frame = if needs_frame {
        Some(sweep_frame(lattice, dl)?)
    } else {
        None
    };
    let bound = effective_bound(bound, dl);
    let degrees: Vec<u32> = tuples.iter().map(|t| t.iter().sum()).collect();
    // On a negation-symmetric coset, visit one of {alpha, -alpha}: odd
    // degrees cancel, even degrees double.
    let symmetric = coset_is_symmetric(coset);

    // Dense accumulators indexed by scaled norm.
    let max_norm = {
        let scaled = &bound * Rational::from_integer(BigInt::from(2 * dl * dl));
        scaled.floor().to_integer().to_i64().unwrap_or(0).max(0) as usize
    };
    let mut acc: Vec<Vec<SpillAcc>> = tuples
        .iter()
        .map(|_| vec![SpillAcc::default(); max_norm + 1])
        .collect();
    let mut fbuf: Vec<i128> = vec![0; rank];
    let mut sweep = |y: &[i64], norm: i64| {
        if let Some(fr) = &frame {
            for i in 0..rank {
                let mut f: i128 = 0;
                for (j, yj) in y.iter().enumerate() {
                    if *yj != 0 {
                        f += fr.num[j][i] as i128 * *yj as i128;
                    }
                }
                fbuf[i] = f;
            }
        }
        let doubled = symmetric && y.iter().any(|v| *v != 0);
        for (idx, t) in tuples.iter().enumerate() {
            if symmetric && degrees[idx] % 2 == 1 {
                continue;
            }
            let mut m: i128 = 1;
            let mut overflow = false;
            for (i, e) in t.iter().enumerate() {
                for _ in 0..*e {
                    match m.checked_mul(fbuf[i]) {
                        Some(v) => m = v,
                        None => {
                            overflow = true;
                            break;
                        }
                    }
                }
                if overflow {
                    break;
                }
            }
            let slot = &mut acc[idx][norm as usize];
            if overflow {
                // exact big-integer fallback for this vector
                let mut big = BigInt::from(1);
                for (i, e) in t.iter().enumerate() {
                    for _ in 0..*e {
                        big *= BigInt::from(fbuf[i]);
                    }
                }
                if doubled {
                    big *= 2;
                }
                let total = slot.total() + big;
                *slot = SpillAcc {
                    small: 0,
                    big: total,
                };
            } else {
                slot.add(m);
                if doubled {
                    slot.add(m);
                }
            }
        }
    };
    if symmetric {
        enumerate_stream_canonical(lattice, coset, &bound, &mut sweep)?;
    } else {
        enumerate_stream(lattice, coset, &bound, &mut sweep)?;
    }
    Ok(acc
        .into_iter()
        .map(|buckets| {
            buckets
                .into_iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(k, v)| (k as i64, v.total()))
                .collect()
        })
        .collect())
}

/// Build the q-series of one weighted theta from bucket sums: coefficient at
/// `q^{norm/(2 dl^2)}` is the folded degree-`deg` frame sum.
pub(crate) fn series_from_sums(
    sums: &BTreeMap<i64, GaussianRational>,
    deg: u32,
    scale: &FrameScale,
    dl: i64,
    trunc: &Rational,
) -> Result<QSeries> {
    let mut terms = Vec::new();
    for (norm, total) in sums {
        let value = scale.fold(total, deg)?;
        if value.is_zero() {
            continue;
        }
        let exp = Rational::new(BigInt::from(*norm), BigInt::from(2 * dl * dl));
        terms.push((exp, value));
    }
    Ok(QSeries::from_terms(terms, trunc))
}

/// Weighted theta of a coset: `sum_alpha (a, alpha)^k q^{(alpha,alpha)/2}`,
/// with `a` given in orthonormal-frame coordinates. `k = 0` is the plain
/// theta function and needs no embedding.
pub fn theta_weighted(
    lattice: &Lattice,
    coset: &CosetRep,
    a: &[GaussianRational],
    k: u32,
    t: &Rational,
) -> Result<QSeries> {
    let rank = lattice.rank();
    let dl = coset.denominator();
    if k == 0 {
        let sums = multi_weighted_sums(lattice, coset, t, &[vec![0; rank]])?;
        let converted: BTreeMap<i64, GaussianRational> = sums[0]
            .iter()
            .map(|(n, v)| {
                (
                    *n,
                    GaussianRational::from_rational(Rational::from_integer(v.clone())),
                )
            })
            .collect();
        let scale = FrameScale {
            den: BigInt::from(1),
            sigma: Rational::one(),
            inv_sqrt_sigma: Some(Rational::one()),
        };
        return series_from_sums(&converted, 0, &scale, dl, t);
    }
    assert_eq!(a.len(), rank, "weight vector length must match rank");
    let frame = sweep_frame(lattice, dl)?;
    // Clear denominators of a: a = anum / aden with Gaussian-integer anum.
    let mut aden = BigInt::from(1);
    for c in a {
        aden = num_integer::Integer::lcm(&aden, c.re.denom());
        aden = num_integer::Integer::lcm(&aden, c.im.denom());
    }
    let anum: Vec<(i128, i128)> = a
        .iter()
        .map(|c| {
            let re = (&c.re * Rational::from_integer(aden.clone())).to_integer();
            let im = (&c.im * Rational::from_integer(aden.clone())).to_integer();
            Ok((
                re.to_i128().ok_or(Error::IrrationalValue)?,
                im.to_i128().ok_or(Error::IrrationalValue)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let rank_n = rank;
    let bound = effective_bound(t, dl);
    let symmetric = coset_is_symmetric(coset);
    if symmetric && k % 2 == 1 {
        // pairing flips sign under negation, so odd powers cancel exactly
        return Ok(QSeries::zero(t));
    }
    let mut buckets: BTreeMap<i64, (BigInt, BigInt)> = BTreeMap::new();
    let mut sweep = |y: &[i64], norm: i64| {
        // dot = sum_i anum_i * F_i as a Gaussian integer
        let mut dre: i128 = 0;
        let mut dim: i128 = 0;
        for i in 0..rank_n {
            let mut f: i128 = 0;
            for (j, yj) in y.iter().enumerate() {
                if *yj != 0 {
                    f += frame.num[j][i] as i128 * *yj as i128;
                }
            }
            dre += anum[i].0 * f;
            dim += anum[i].1 * f;
        }
        // (dre + i dim)^k with big-integer arithmetic (k is small)
        let mut pre = BigInt::from(1);
        let mut pim = BigInt::from(0);
        let bre = BigInt::from(dre);
        let bim = BigInt::from(dim);
        for _ in 0..k {
            let nre = &pre * &bre - &pim * &bim;
            let nim = &pre * &bim + &pim * &bre;
            pre = nre;
            pim = nim;
        }
        if symmetric && y.iter().any(|v| *v != 0) {
            pre *= 2;
            pim *= 2;
        }
        let slot = buckets
            .entry(norm)
            .or_insert_with(|| (BigInt::zero(), BigInt::zero()));
        slot.0 += pre;
        slot.1 += pim;
    };
    if symmetric {
        enumerate_stream_canonical(lattice, coset, &bound, &mut sweep)?;
    } else {
        enumerate_stream(lattice, coset, &bound, &mut sweep)?;
    }
    let mut aden_pow = Rational::one();
    for _ in 0..k {
        aden_pow /= Rational::from_integer(aden.clone());
    }
    let sums: BTreeMap<i64, GaussianRational> = buckets
        .into_iter()
        .map(|(n, (re, im))| {
            (
                n,
                &GaussianRational::new(Rational::from_integer(re), Rational::from_integer(im))
                    * &aden_pow,
            )
        })
        .collect();
    series_from_sums(&sums, k, &frame.scale, dl, t)
}

/// Harmonic theta `theta_L(P, q) = sum_alpha P(alpha) q^{(alpha,alpha)/2}`,
/// with `P` evaluated at the orthonormal-frame coordinates of each vector.
pub fn theta_harmonic(lattice: &Lattice, p: &HarmonicPoly, t: &Rational) -> Result<QSeries> {
    let rank = lattice.rank();
    assert!(
        p.nvars() <= rank,
        "harmonic uses more variables than the rank"
    );
    if p.poly().is_zero() {
        return Ok(QSeries::zero(t));
    }
    let coset = CosetRep::zero(rank);
    let dl = 1i64;
    // Pad exponent tuples to the full rank.
    let monomials: Vec<(Vec<u32>, GaussianRational)> = p
        .poly()
        .iter()
        .map(|(e, c)| {
            let mut full = e.clone();
            full.resize(rank, 0);
            (full, c.clone())
        })
        .collect();
    let tuples: Vec<Vec<u32>> = monomials.iter().map(|(e, _)| e.clone()).collect();
    let sums = multi_weighted_sums(lattice, &coset, t, &tuples)?;
    // Combine across monomials first so cross-monomial cancellation happens
    // before folding.
    let mut combined: BTreeMap<i64, GaussianRational> = BTreeMap::new();
    for ((_, c), per_tuple) in monomials.iter().zip(&sums) {
        for (norm, s) in per_tuple {
            let add = c * &GaussianRational::from_rational(Rational::from_integer(s.clone()));
            let slot = combined.entry(*norm).or_insert_with(GaussianRational::zero);
            *slot += &add;
        }
    }
    let scale = if p.degree() == 0 {
        FrameScale {
            den: BigInt::from(1),
            sigma: Rational::one(),
            inv_sqrt_sigma: Some(Rational::one()),
        }
    } else {
        let mut s = FrameScale::of(lattice)?;
        s.den *= BigInt::from(dl);
        s
    };
    series_from_sums(&combined, p.degree(), &scale, dl, t)
}

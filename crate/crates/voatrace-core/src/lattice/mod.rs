//! Even positive-definite lattices with dual cosets: exact short-vector
//! enumeration, plain/weighted/harmonic theta series, spherical-harmonic
//! primary states, and the lattice trace engine with its brute-force oracle.
//!
//! Two coordinate frames coexist. Lattice-basis coordinates are integral (up
//! to coset denominators) and drive enumeration through the Gram matrix. The
//! orthonormal frame hosts harmonic polynomials and pairings `(h_i, alpha)`;
//! it is reached through an embedding matrix `M` with `M M^T = sigma * gram`
//! for a positive rational `sigma`, so that the true frame coordinates of a
//! lattice vector `x` are `(x^T M) / sqrt(sigma)`. Keeping the scale `sigma`
//! symbolic lets frames like that of the root lattice A1 (which needs
//! `sqrt 2`) stay exact: frame values are integers over `D * sqrt(sigma)`,
//! and odd-degree contributions either cancel by the `alpha <-> -alpha`
//! symmetry or expose a genuinely irrational sum as an error.

// Indexed loops over small matrices are clearer here than iterator chains.
#![allow(clippy::needless_range_loop)]

mod enumerate;
mod poly;
mod theta;
mod trace;

pub use enumerate::enumerate_vectors;
pub use poly::{isotropic_power, laplacian, primary_state, HarmonicPoly, Poly};
pub use theta::{theta_harmonic, theta_weighted};
pub use trace::{
    brute_force_lattice_z, lattice_trace, lattice_trace_batch, reduce_lattice_monomial,
    PairingPolynomial,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::scalar::{GaussianRational, Rational};

/// A dual-coset representative: a rational shift vector `lambda` (in lattice
/// coordinates) with `gram * lambda` integral.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetRep {
    shift: Vec<Rational>,
}

impl CosetRep {
    pub fn zero(rank: usize) -> Self {
        CosetRep {
            shift: vec![Rational::zero(); rank],
        }
    }

    pub fn shift(&self) -> &[Rational] {
        &self.shift
    }

    pub fn is_zero(&self) -> bool {
        self.shift.iter().all(|c| c.is_zero())
    }

    /// Common denominator of the shift coordinates.
    pub fn denominator(&self) -> i64 {
        let mut den = BigInt::one();
        for c in &self.shift {
            den = den.lcm(c.denom());
        }
        den.to_i64().expect("coset denominator fits i64")
    }
}

/// Orthonormal-frame embedding: basis vector `j` has frame coordinates
/// `num[j] / (den * sqrt(sigma))`, with `M M^T = sigma * gram`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    num: Vec<Vec<BigInt>>,
    den: BigInt,
    sigma: Rational,
}

impl Embedding {
    /// Integer numerator rows of the embedding matrix.
    pub(crate) fn num_rows(&self) -> &[Vec<BigInt>] {
        &self.num
    }

    /// The rational embedding matrix `M = num / den`, row per basis vector.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        self.num
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| Rational::new(v.clone(), self.den.clone()))
                    .collect()
            })
            .collect()
    }

    pub fn sigma(&self) -> &Rational {
        &self.sigma
    }

    /// `sqrt(1/sigma)` when rational: both numerator and denominator of
    /// `sigma` are perfect squares.
    pub fn inv_sqrt_sigma(&self) -> Option<Rational> {
        let p = self.sigma.numer().sqrt();
        let q = self.sigma.denom().sqrt();
        if &p * &p == *self.sigma.numer() && &q * &q == *self.sigma.denom() {
            Some(Rational::new(q, p))
        } else {
            None
        }
    }
}

/// An even positive-definite lattice given by its Gram matrix, with optional
/// orthonormal-frame embedding and dual-coset representatives.
#[derive(Debug, Clone)]
pub struct Lattice {
    name: String,
    gram: Vec<Vec<i64>>,
    rank: usize,
    embedding: Option<Embedding>,
    cosets: Vec<CosetRep>,
    det: BigInt,
    level: BigInt,
}

impl Lattice {
    /// Validate and build a lattice. The Gram matrix must be symmetric with
    /// even diagonal and positive definite; an embedding, when supplied, must
    /// reproduce the Gram matrix up to a positive rational scale `sigma`;
    /// coset shifts must pair integrally with the lattice. The zero coset is
    /// always present (prepended when missing).
    pub fn new(
        name: impl Into<String>,
        gram: Vec<Vec<i64>>,
        embedding: Option<Vec<Vec<Rational>>>,
        cosets: Vec<Vec<Rational>>,
    ) -> Result<Lattice> {
        let rank = gram.len();
        if rank == 0 {
            return Err(Error::BadGram("empty matrix".into()));
        }
        for row in &gram {
            if row.len() != rank {
                return Err(Error::BadGram("matrix is not square".into()));
            }
        }
        for i in 0..rank {
            for j in 0..rank {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::BadGram(format!(
                        "asymmetric at ({i},{j}): {} vs {}",
                        gram[i][j], gram[j][i]
                    )));
                }
            }
            if gram[i][i] % 2 != 0 {
                return Err(Error::BadGram(format!(
                    "odd diagonal entry {} at index {i}",
                    gram[i][i]
                )));
            }
            if gram[i][i] <= 0 {
                return Err(Error::BadGram("not positive definite".into()));
            }
        }
        // Positive definiteness and determinant via the exact decomposition.
        let chol = enumerate::cholesky(&gram)
            .map_err(|_| Error::BadGram("not positive definite".into()))?;
        let det = {
            let mut acc = Rational::one();
            for d in &chol.diag {
                acc *= d;
            }
            debug_assert!(acc.is_integer());
            acc.to_integer()
        };
        let level = compute_level(&gram)?;

        let embedding = match embedding {
            None => None,
            Some(m) => Some(validate_embedding(&gram, m)?),
        };

        let mut reps = vec![CosetRep::zero(rank)];
        for shift in cosets {
            if shift.len() != rank {
                return Err(Error::BadCoset(format!(
                    "shift has {} coordinates, lattice has rank {rank}",
                    shift.len()
                )));
            }
            // gram * lambda must be integral (lambda in the dual lattice)
            for i in 0..rank {
                let mut acc = Rational::zero();
                for j in 0..rank {
                    acc += Rational::from_integer(BigInt::from(gram[i][j])) * &shift[j];
                }
                if !acc.is_integer() {
                    return Err(Error::BadCoset(format!(
                        "shift does not pair integrally with basis vector {i}"
                    )));
                }
            }
            let rep = CosetRep { shift };
            if !rep.is_zero() && !reps.contains(&rep) {
                reps.push(rep);
            }
        }

        Ok(Lattice {
            name: name.into(),
            gram,
            rank,
            embedding,
            cosets: reps,
            det,
            level,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    pub fn determinant(&self) -> &BigInt {
        &self.det
    }

    /// Least `N` with `N (beta, beta)/2` integral for every dual vector.
    pub fn level(&self) -> &BigInt {
        &self.level
    }

    pub fn embedding(&self) -> Option<&Embedding> {
        self.embedding.as_ref()
    }

    /// Coset representatives; index 0 is always the zero coset.
    pub fn cosets(&self) -> &[CosetRep] {
        &self.cosets
    }

    pub fn coset(&self, idx: usize) -> Result<&CosetRep> {
        self.cosets
            .get(idx)
            .ok_or_else(|| Error::BadCoset(format!("no coset with index {idx}")))
    }

    /// `(a, b) = a^T gram b` for rational coordinate vectors.
    pub fn pairing(&self, a: &[Rational], b: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for i in 0..self.rank {
            for j in 0..self.rank {
                acc += &a[i] * &b[j] * Rational::from_integer(BigInt::from(self.gram[i][j]));
            }
        }
        acc
    }

    /// The rank-1 root lattice A1 with Gram matrix `[[2]]`, its frame scaled
    /// so that the basis vector has frame coordinate `sqrt 2` exactly, and
    /// both dual cosets.
    pub fn a1() -> Lattice {
        Lattice::new(
            "a1",
            vec![vec![2]],
            Some(vec![vec![Rational::one()]]),
            vec![vec![Rational::new(BigInt::one(), BigInt::from(2))]],
        )
        .expect("A1 preset is valid")
    }

    /// The E8 root lattice in its even unimodular coordinate model: simple
    /// roots with entries in `(1/2)Z`, frame scale `sigma = 1`.
    pub fn e8() -> Lattice {
        let gram = vec![
            vec![2, 0, -1, 0, 0, 0, 0, 0],
            vec![0, 2, 0, -1, 0, 0, 0, 0],
            vec![-1, 0, 2, -1, 0, 0, 0, 0],
            vec![0, -1, -1, 2, -1, 0, 0, 0],
            vec![0, 0, 0, -1, 2, -1, 0, 0],
            vec![0, 0, 0, 0, -1, 2, -1, 0],
            vec![0, 0, 0, 0, 0, -1, 2, -1],
            vec![0, 0, 0, 0, 0, 0, -1, 2],
        ];
        let half = |n: i64| Rational::new(BigInt::from(n), BigInt::from(2));
        let row = |v: [i64; 8]| v.iter().map(|n| half(*n)).collect::<Vec<_>>();
        let embedding = vec![
            row([1, -1, -1, -1, -1, -1, -1, 1]),
            row([2, 2, 0, 0, 0, 0, 0, 0]),
            row([-2, 2, 0, 0, 0, 0, 0, 0]),
            row([0, -2, 2, 0, 0, 0, 0, 0]),
            row([0, 0, -2, 2, 0, 0, 0, 0]),
            row([0, 0, 0, -2, 2, 0, 0, 0]),
            row([0, 0, 0, 0, -2, 2, 0, 0]),
            row([0, 0, 0, 0, 0, -2, 2, 0]),
        ];
        Lattice::new("e8", gram, Some(embedding), Vec::new()).expect("E8 preset is valid")
    }
}

fn validate_embedding(gram: &[Vec<i64>], m: Vec<Vec<Rational>>) -> Result<Embedding> {
    let rank = gram.len();
    if m.len() != rank || m.iter().any(|row| row.len() != m[0].len()) {
        return Err(Error::BadEmbedding(
            "embedding must have one row per basis vector".into(),
        ));
    }
    let cols = m[0].len();
    if cols != rank {
        return Err(Error::BadEmbedding(format!(
            "embedding must be square ({rank}x{rank}), got {rank}x{cols}"
        )));
    }
    // P = M M^T must equal sigma * gram for a single positive rational sigma.
    let mut sigma: Option<Rational> = None;
    for i in 0..rank {
        for j in 0..rank {
            let mut p = Rational::zero();
            for k in 0..cols {
                p += &m[i][k] * &m[j][k];
            }
            let g = Rational::from_integer(BigInt::from(gram[i][j]));
            if g.is_zero() {
                if !p.is_zero() {
                    return Err(Error::BadEmbedding(format!(
                        "inner product at ({i},{j}) should vanish, got {p}"
                    )));
                }
            } else {
                let ratio = p / &g;
                match &sigma {
                    None => {
                        if !ratio.is_positive() {
                            return Err(Error::BadEmbedding(
                                "embedding scale must be positive".into(),
                            ));
                        }
                        sigma = Some(ratio);
                    }
                    Some(s) => {
                        if ratio != *s {
                            return Err(Error::BadEmbedding(format!(
                                "inconsistent scale at ({i},{j}): {ratio} vs {s}"
                            )));
                        }
                    }
                }
            }
        }
    }
    let sigma = sigma.ok_or_else(|| Error::BadEmbedding("gram matrix is zero".into()))?;
    // Clear denominators to an integer numerator matrix over a common den.
    let mut den = BigInt::one();
    for row in &m {
        for v in row {
            den = den.lcm(v.denom());
        }
    }
    let num = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| (v * Rational::from_integer(den.clone())).to_integer())
                .collect()
        })
        .collect();
    Ok(Embedding { num, den, sigma })
}

/// Least `N` such that `N G^{-1}` is integral with even diagonal.
fn compute_level(gram: &[Vec<i64>]) -> Result<BigInt> {
    let rank = gram.len();
    let inv = invert_rational(gram).ok_or(Error::NotPositiveDefinite)?;
    let mut n = BigInt::one();
    for row in &inv {
        for v in row {
            n = n.lcm(v.denom());
        }
    }
    let diag_even = (0..rank).all(|i| {
        let scaled = &inv[i][i] * Rational::from_integer(n.clone());
        debug_assert!(scaled.is_integer());
        scaled.to_integer().is_even()
    });
    if !diag_even {
        n *= 2;
    }
    Ok(n)
}

fn invert_rational(gram: &[Vec<i64>]) -> Option<Vec<Vec<Rational>>> {
    let n = gram.len();
    let mut a: Vec<Vec<Rational>> = gram
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| Rational::from_integer(BigInt::from(*v)))
                .collect()
        })
        .collect();
    let mut inv: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|r| !a[*r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] /= &p;
            inv[col][j] /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..n {
                    let d = &f * &a[col][j];
                    a[r][j] -= d;
                    let d = &f * &inv[col][j];
                    inv[r][j] -= d;
                }
            }
        }
    }
    Some(inv)
}

/// Per-lattice constants for exact frame arithmetic: integer frame
/// numerators are read against `den * sqrt(sigma)`.
#[derive(Debug, Clone)]
pub(crate) struct FrameScale {
    pub den: BigInt,
    pub sigma: Rational,
    pub inv_sqrt_sigma: Option<Rational>,
}

impl FrameScale {
    pub(crate) fn of(lattice: &Lattice) -> Result<FrameScale> {
        let emb = lattice.embedding().ok_or(Error::NoEmbedding)?;
        Ok(FrameScale {
            den: emb.den.clone(),
            sigma: emb.sigma.clone(),
            inv_sqrt_sigma: emb.inv_sqrt_sigma(),
        })
    }

    /// Fold an integer frame sum of homogeneous degree `deg` into an exact
    /// scalar: value = `sum / (den^deg * sqrt(sigma)^deg)`. Odd degrees
    /// require either a vanishing sum or a perfect-square `sigma`.
    pub(crate) fn fold(&self, sum: &GaussianRational, deg: u32) -> Result<GaussianRational> {
        if sum.is_zero() {
            return Ok(GaussianRational::zero());
        }
        let mut scale = Rational::one();
        for _ in 0..deg {
            scale /= Rational::from_integer(self.den.clone());
        }
        let half = deg / 2;
        for _ in 0..half {
            scale /= &self.sigma;
        }
        if deg % 2 == 1 {
            match &self.inv_sqrt_sigma {
                Some(r) => scale *= r,
                None => return Err(Error::IrrationalValue),
            }
        }
        Ok(sum * &scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ratio};

    #[test]
    fn a1_metadata() {
        let a1 = Lattice::a1();
        assert_eq!(a1.rank(), 1);
        assert_eq!(a1.determinant(), &BigInt::from(2));
        assert_eq!(a1.level(), &BigInt::from(4));
        assert_eq!(a1.cosets().len(), 2);
        let emb = a1.embedding().unwrap();
        assert_eq!(emb.sigma(), &ratio(1, 2));
        assert!(emb.inv_sqrt_sigma().is_none());
    }

    #[test]
    fn e8_metadata() {
        let e8 = Lattice::e8();
        assert_eq!(e8.rank(), 8);
        assert_eq!(e8.determinant(), &BigInt::one());
        assert_eq!(e8.level(), &BigInt::one());
        let emb = e8.embedding().unwrap();
        assert_eq!(emb.sigma(), &Rational::one());
        assert_eq!(emb.inv_sqrt_sigma(), Some(Rational::one()));
    }

    #[test]
    fn bad_grams_are_rejected() {
        // asymmetric
        let e = Lattice::new("x", vec![vec![2, 1], vec![0, 2]], None, vec![]);
        assert!(matches!(e, Err(Error::BadGram(_))));
        // odd diagonal
        let e = Lattice::new("x", vec![vec![1]], None, vec![]);
        assert!(matches!(e, Err(Error::BadGram(_))));
        // not positive definite
        let e = Lattice::new("x", vec![vec![2, 4], vec![4, 2]], None, vec![]);
        assert!(matches!(e, Err(Error::BadGram(_))));
    }

    #[test]
    fn bad_embeddings_are_rejected() {
        // scale 9/2 is a consistent positive rational, so this is accepted
        let e = Lattice::new("x", vec![vec![2]], Some(vec![vec![rat(3)]]), vec![]);
        assert!(e.is_ok());
        // off-diagonal inner product does not vanish where gram does
        let e = Lattice::new(
            "x",
            vec![vec![2, 0], vec![0, 2]],
            Some(vec![vec![rat(1), rat(0)], vec![rat(1), rat(1)]]),
            vec![],
        );
        assert!(matches!(e, Err(Error::BadEmbedding(_))));
    }

    #[test]
    fn coset_validation() {
        // alpha/2 pairs integrally with A1, alpha/3 does not
        let ok = Lattice::new("a", vec![vec![2]], None, vec![vec![ratio(1, 2)]]);
        assert!(ok.is_ok());
        let bad = Lattice::new("a", vec![vec![2]], None, vec![vec![ratio(1, 3)]]);
        assert!(matches!(bad, Err(Error::BadCoset(_))));
    }

    #[test]
    fn pairing_uses_gram() {
        let e8 = Lattice::e8();
        let mut a = vec![Rational::zero(); 8];
        a[0] = Rational::one();
        assert_eq!(e8.pairing(&a, &a), rat(2));
    }
}

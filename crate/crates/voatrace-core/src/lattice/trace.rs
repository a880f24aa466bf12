//! Trace functions over lattice modules: the symbolic engine and its
//! brute-force counterpart.
//!
//! For a bracket monomial `v` over the Heisenberg subalgebra, the graded
//! trace over `M(1) x e^alpha` is reduced once for a generic momentum: the
//! zero-mode term of the length-one recursion contributes the formal pairing
//! `(h_i, alpha)`, everything else recurses exactly as in the pure boson
//! case. The result is a [`PairingPolynomial`]: quasi-modular coefficients
//! attached to pairing monomials `prod_i (h_i, alpha)^{t_i}`. Summing over a
//! coset replaces each pairing monomial by a multi-weighted theta sum, and
//! dividing by `eta^d` gives the trace.
//!
//! The brute-force route expands the zero mode of each round monomial into
//! normal-ordered mode tuples, with `a(0)` acting as the pairing scalar, and
//! takes honest traces over the enumerated graded pieces of each `M(1) x
//! e^alpha`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use crate::error::Result;
use crate::fock::{slot_trace_cached, tuple_classes_cached, BracketMonomial, FockVector};
use crate::modforms::{eta_power, qm_to_series, QuasiModular};
use crate::qseries::QSeries;
use crate::scalar::{rat, ratio, GaussianRational, Rational};
use crate::zhu::eisenstein_generator;

use super::theta::{multi_weighted_sums, series_from_sums};
use super::{CosetRep, FrameScale, Lattice};

/// A polynomial in the formal pairings `(h_1, alpha), ..., (h_d, alpha)`
/// with quasi-modular coefficients: exponent tuples of length `rank` mapped
/// to elements of `C[E2,E4,E6]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingPolynomial {
    terms: BTreeMap<Vec<u32>, QuasiModular>,
    rank: u32,
}

impl PairingPolynomial {
    pub fn zero(rank: u32) -> Self {
        PairingPolynomial {
            terms: BTreeMap::new(),
            rank,
        }
    }

    pub fn one(rank: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![0; rank as usize], QuasiModular::one());
        PairingPolynomial { terms, rank }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &QuasiModular)> + '_ {
        self.terms.iter()
    }

    /// Coefficient of the pairing monomial with exponents `t`.
    pub fn coeff(&self, t: &[u32]) -> QuasiModular {
        self.terms
            .get(t)
            .cloned()
            .unwrap_or_else(QuasiModular::zero)
    }

    /// Largest total pairing degree present.
    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|t| t.iter().sum()).max().unwrap_or(0)
    }

    fn add_assign(&mut self, t: Vec<u32>, qm: &QuasiModular) {
        if qm.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(t.clone())
            .or_insert_with(QuasiModular::zero);
        *slot = slot.add(qm);
        if slot.is_zero() {
            self.terms.remove(&t);
        }
    }

    fn add_all(&mut self, other: &PairingPolynomial) {
        for (t, qm) in &other.terms {
            self.add_assign(t.clone(), qm);
        }
    }

    fn scaled_qm(&self, f: &QuasiModular) -> PairingPolynomial {
        let mut out = PairingPolynomial::zero(self.rank);
        for (t, qm) in &self.terms {
            out.add_assign(t.clone(), &qm.mul(f));
        }
        out
    }

    /// Multiply by the formal pairing `(h_dir, alpha)`.
    fn bumped(&self, dir: u32) -> PairingPolynomial {
        let mut out = PairingPolynomial::zero(self.rank);
        for (t, qm) in &self.terms {
            let mut t2 = t.clone();
            t2[(dir - 1) as usize] += 1;
            out.add_assign(t2, qm);
        }
        out
    }
}

impl fmt::Display for PairingPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, qm) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let vars: Vec<String> = t
                .iter()
                .enumerate()
                .filter(|(_, e)| **e > 0)
                .map(|(i, e)| {
                    if *e == 1 {
                        format!("p{}", i + 1)
                    } else {
                        format!("p{}^{}", i + 1, e)
                    }
                })
                .collect();
            if vars.is_empty() {
                write!(f, "({qm})")?;
            } else {
                write!(f, "({qm})*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Reduce the trace of a bracket monomial over a generic `M(1) x e^alpha`:
/// the quasi-modular recursion with the zero-mode pairing retained as a
/// formal scalar. `Z_alpha(v, q) =` result with `(h_i, alpha)` substituted,
/// times `q^{(alpha,alpha)/2} / eta^d`.
pub fn reduce_lattice_monomial(m: &BracketMonomial) -> PairingPolynomial {
    let mut memo: HashMap<BracketMonomial, PairingPolynomial> = HashMap::new();
    reduce_inner(m, &mut memo)
}

/// Symbolic traces of many monomials over the same coset, sharing one
/// reduction memo and a single enumeration sweep for all pairing monomials.
pub fn lattice_trace_batch(
    lattice: &Lattice,
    coset: &CosetRep,
    monomials: &[BracketMonomial],
    t: &Rational,
) -> Result<Vec<QSeries>> {
    let d = lattice.rank() as i64;
    let window = t + ratio(d, 24);
    let mut memo: HashMap<BracketMonomial, PairingPolynomial> = HashMap::new();
    let reduced: Vec<PairingPolynomial> = monomials
        .iter()
        .map(|m| {
            assert_eq!(
                m.rank() as usize,
                lattice.rank(),
                "monomial rank must match lattice"
            );
            reduce_inner(m, &mut memo)
        })
        .collect();
    let mut tuple_set: Vec<Vec<u32>> = Vec::new();
    for p in &reduced {
        for (tuple, _) in p.iter() {
            if !tuple_set.contains(tuple) {
                tuple_set.push(tuple.clone());
            }
        }
    }
    tuple_set.sort();
    let dl = coset.denominator();
    let sums = multi_weighted_sums(lattice, coset, &window, &tuple_set)?;
    let needs_frame = tuple_set.iter().any(|t| t.iter().any(|e| *e > 0));
    let scale = if needs_frame {
        let mut s = FrameScale::of(lattice)?;
        s.den *= BigInt::from(dl);
        s
    } else {
        FrameScale {
            den: BigInt::one(),
            sigma: Rational::one(),
            inv_sqrt_sigma: Some(Rational::one()),
        }
    };
    let mut theta_by_tuple: BTreeMap<Vec<u32>, QSeries> = BTreeMap::new();
    for (tuple, per_tuple) in tuple_set.iter().zip(&sums) {
        let deg: u32 = tuple.iter().sum();
        let converted: BTreeMap<i64, GaussianRational> = per_tuple
            .iter()
            .map(|(n, v)| {
                (
                    *n,
                    GaussianRational::from_rational(Rational::from_integer(v.clone())),
                )
            })
            .collect();
        theta_by_tuple.insert(
            tuple.clone(),
            series_from_sums(&converted, deg, &scale, dl, &window)?,
        );
    }
    let eta = eta_power(-d, t);
    let mut out = Vec::with_capacity(monomials.len());
    for p in &reduced {
        let mut acc = QSeries::zero(&window);
        for (tuple, qm) in p.iter() {
            let theta = &theta_by_tuple[tuple];
            if theta.is_zero() {
                continue;
            }
            let f = qm_to_series(qm, &window);
            acc = acc.add(&f.mul(theta).truncated(&window));
        }
        out.push(acc.mul(&eta).truncated(t));
    }
    Ok(out)
}

fn reduce_inner(
    m: &BracketMonomial,
    memo: &mut HashMap<BracketMonomial, PairingPolynomial>,
) -> PairingPolynomial {
    if m.is_empty() {
        return PairingPolynomial::one(m.rank());
    }
    if let Some(hit) = memo.get(m) {
        return hit.clone();
    }
    let factors = m.factors();
    let (dir, r) = factors[0];
    let rest: Vec<(u32, u32)> = factors[1..].to_vec();
    let mut acc = PairingPolynomial::zero(m.rank());
    // zero-mode pairing from the length-one step
    if r == 1 {
        let sub = reduce_inner(&BracketMonomial::new(rest.clone(), m.rank()), memo);
        acc.add_all(&sub.bumped(dir));
    }
    for (i2, m2, mult) in BracketMonomial::new(rest.clone(), m.rank()).factor_counts() {
        if i2 != dir || (r + m2) % 2 != 0 {
            continue;
        }
        let two_k = (r + m2) as i64;
        let sign = if r % 2 == 1 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let h = crate::scalar::binomial(two_k - 1, (r - 1) as u64);
        let scalar = Rational::from_integer(sign * h * BigInt::from(m2 as i64 * mult as i64));
        let mut sub_factors = rest.clone();
        let pos = sub_factors
            .iter()
            .position(|f| *f == (i2, m2))
            .expect("factor present");
        sub_factors.remove(pos);
        let sub = reduce_inner(&BracketMonomial::new(sub_factors, m.rank()), memo);
        let coeff = eisenstein_generator(two_k).scaled(&GaussianRational::from_rational(scalar));
        acc.add_all(&sub.scaled_qm(&coeff));
    }
    memo.insert(m.clone(), acc.clone());
    acc
}

/// The symbolic trace of a bracket monomial over the module indexed by a
/// coset: pairings become multi-weighted theta sums, divided by `eta^d`.
///
/// A nonzero `momentum` factor `e^beta` makes every trace vanish (shifted
/// momentum never returns to its graded piece), so the zero series comes
/// back without any enumeration.
pub fn lattice_trace(
    lattice: &Lattice,
    coset: &CosetRep,
    v: &BracketMonomial,
    momentum: Option<&[Rational]>,
    t: &Rational,
) -> Result<QSeries> {
    assert_eq!(
        v.rank() as usize,
        lattice.rank(),
        "monomial rank must match lattice rank"
    );
    if let Some(beta) = momentum {
        if beta.iter().any(|c| !num_traits::Zero::is_zero(c)) {
            return Ok(QSeries::zero(t));
        }
    }
    Ok(
        lattice_trace_batch(lattice, coset, std::slice::from_ref(v), t)?
            .pop()
            .expect("batch of one"),
    )
}

/// Brute-force trace over the module indexed by a coset:
/// `sum_alpha sum_n tr_{M(1)_n x e^alpha} o(v) q^{n + (alpha,alpha)/2 - d/24}`,
/// with `a(0)` acting on `e^alpha` as the pairing `(a, alpha)`.
///
/// As with the pure boson oracle, `v` may mix round weights; the zero mode
/// extends linearly.
pub fn brute_force_lattice_z(
    lattice: &Lattice,
    coset: &CosetRep,
    v: &FockVector,
    t: &Rational,
) -> Result<QSeries> {
    assert_eq!(
        v.rank() as usize,
        lattice.rank(),
        "vector rank must match lattice rank"
    );
    let d = lattice.rank() as i64;
    let rank = v.rank();
    let window = t + ratio(d, 24);
    let dl = coset.denominator();
    // Largest Fock weight that can contribute.
    let mut n_max: i64 = -1;
    let mut n = 0i64;
    while rat(n) < window {
        n_max = n;
        n += 1;
    }
    if n_max < 0 {
        return Ok(QSeries::zero(t));
    }

    // Tuple classes per round monomial, allowing zero modes.
    let per_monomial: Vec<(
        GaussianRational,
        std::sync::Arc<Vec<crate::fock::TupleClass>>,
    )> = v
        .iter()
        .map(|(state, coeff)| {
            (
                coeff.clone(),
                tuple_classes_cached(state.parts(), rank, n_max as u64, true),
            )
        })
        .collect();

    // All zero-mode direction patterns that occur.
    let mut tuple_set: Vec<Vec<u32>> = Vec::new();
    for (_, classes) in &per_monomial {
        for class in classes.iter() {
            if !tuple_set.contains(&class.zero_dirs) {
                tuple_set.push(class.zero_dirs.clone());
            }
        }
    }
    tuple_set.sort();
    let sums = multi_weighted_sums(lattice, coset, &window, &tuple_set)?;
    let needs_frame = tuple_set.iter().any(|t| t.iter().any(|e| *e > 0));
    let scale = if needs_frame {
        let mut s = FrameScale::of(lattice)?;
        s.den *= BigInt::from(dl);
        s
    } else {
        FrameScale {
            den: BigInt::one(),
            sigma: Rational::one(),
            inv_sqrt_sigma: Some(Rational::one()),
        }
    };
    let mut theta_by_tuple: BTreeMap<Vec<u32>, QSeries> = BTreeMap::new();
    for (tuple, per_tuple) in tuple_set.iter().zip(&sums) {
        let deg: u32 = tuple.iter().sum();
        let converted: BTreeMap<i64, GaussianRational> = per_tuple
            .iter()
            .map(|(n, v)| {
                (
                    *n,
                    GaussianRational::from_rational(Rational::from_integer(v.clone())),
                )
            })
            .collect();
        theta_by_tuple.insert(
            tuple.clone(),
            series_from_sums(&converted, deg, &scale, dl, &window)?,
        );
    }

    let mut acc = QSeries::zero(&window);
    for (coeff, classes) in &per_monomial {
        let mut mono_acc = QSeries::zero(&window);
        for class in classes.iter() {
            let theta = &theta_by_tuple[&class.zero_dirs];
            if theta.is_zero() {
                continue;
            }
            let mut s_terms = Vec::new();
            for n in 0..=n_max {
                let s = slot_trace_cached(rank, n as u64, &class.slots);
                if !num_traits::Zero::is_zero(&s) {
                    s_terms.push((
                        rat(n),
                        GaussianRational::from_rational(Rational::from_integer(s)),
                    ));
                }
            }
            let s_series = QSeries::from_terms(s_terms, &window);
            if s_series.is_zero() {
                continue;
            }
            let w = GaussianRational::from_rational(Rational::from_integer(class.coeff.clone()));
            mono_acc = mono_acc.add(&s_series.mul(theta).truncated(&window).scaled(&w));
        }
        acc = acc.add(&mono_acc.scaled(coeff));
    }
    Ok(acc.shifted(&ratio(-d, 24)).truncated(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::bracket_to_round;
    use crate::lattice::poly::{isotropic_power, primary_state, HarmonicPoly, Poly};
    use crate::lattice::theta::{theta_harmonic, theta_weighted};
    use crate::modforms::qm_from_series;
    use crate::scalar::rat;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    #[test]
    fn generic_momentum_reduction_of_mode_one_square() {
        // Z_alpha(a[-1]^2 1) = ((a,alpha)^2 + E2) q^{(alpha,alpha)/2}/eta^d
        let m = BracketMonomial::new(vec![(1, 1), (1, 1)], 1);
        let p = reduce_lattice_monomial(&m);
        assert_eq!(p.coeff(&[2]), QuasiModular::one());
        assert_eq!(p.coeff(&[0]), QuasiModular::e2());
        assert_eq!(p.iter().count(), 2);
    }

    #[test]
    fn vacuum_trace_is_theta_over_eta() {
        let a1 = Lattice::a1();
        let zero = CosetRep::zero(1);
        let t = rat(5);
        let z = lattice_trace(&a1, &zero, &BracketMonomial::vacuum(1), None, &t).unwrap();
        let theta = theta_weighted(&a1, &zero, &[g(0)], 0, &(t.clone() + ratio(1, 24))).unwrap();
        let expected = theta.mul(&eta_power(-1, &t)).truncated(&t);
        assert_eq!(z, expected);
    }

    #[test]
    fn nonzero_momentum_vanishes() {
        let a1 = Lattice::a1();
        let zero = CosetRep::zero(1);
        let beta = vec![rat(1)];
        let z = lattice_trace(
            &a1,
            &zero,
            &BracketMonomial::new(vec![(1, 1)], 1),
            Some(&beta),
            &rat(4),
        )
        .unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn brute_force_vacuum_characters() {
        let a1 = Lattice::a1();
        let t = rat(5);
        // full lattice: theta/eta
        let z = brute_force_lattice_z(&a1, &CosetRep::zero(1), &FockVector::vacuum(1), &t).unwrap();
        let theta = theta_weighted(
            &a1,
            &CosetRep::zero(1),
            &[g(0)],
            0,
            &(t.clone() + ratio(1, 24)),
        )
        .unwrap();
        assert_eq!(z, theta.mul(&eta_power(-1, &t)).truncated(&t));
        // dual coset: q^{1/4}(2 + ...)/eta
        let coset = a1.coset(1).unwrap().clone();
        let zc = brute_force_lattice_z(&a1, &coset, &FockVector::vacuum(1), &t).unwrap();
        let theta_c = theta_weighted(&a1, &coset, &[g(0)], 0, &(t.clone() + ratio(1, 24))).unwrap();
        assert_eq!(zc, theta_c.mul(&eta_power(-1, &t)).truncated(&t));
    }

    #[test]
    fn single_mode_one_state_traces_to_zero() {
        // v = h1(-1) vac: sum over alpha of (h1, alpha) cancels.
        let a1 = Lattice::a1();
        let v = bracket_to_round(&BracketMonomial::new(vec![(1, 1)], 1));
        let z = brute_force_lattice_z(&a1, &CosetRep::zero(1), &v, &rat(4)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn oracle_equivalence_on_a1() {
        let a1 = Lattice::a1();
        let t = rat(5);
        for coset_idx in [0usize, 1] {
            let coset = a1.coset(coset_idx).unwrap().clone();
            for w in 0..=4u64 {
                for m in BracketMonomial::enumerate(1, w) {
                    let sym = lattice_trace(&a1, &coset, &m, None, &t).unwrap();
                    let brute =
                        brute_force_lattice_z(&a1, &coset, &bracket_to_round(&m), &t).unwrap();
                    assert_eq!(sym, brute, "monomial {m} coset {coset_idx}");
                }
            }
        }
    }

    #[test]
    fn oracle_equivalence_on_e8_low_order() {
        let e8 = Lattice::e8();
        let zero = CosetRep::zero(8);
        let t = rat(2);
        // a sampling of weight <= 3 monomials across directions
        let monomials = vec![
            BracketMonomial::vacuum(8),
            BracketMonomial::new(vec![(1, 1)], 8),
            BracketMonomial::new(vec![(1, 1), (1, 1)], 8),
            BracketMonomial::new(vec![(1, 1), (2, 1)], 8),
            BracketMonomial::new(vec![(3, 2)], 8),
            BracketMonomial::new(vec![(1, 2), (1, 1)], 8),
            BracketMonomial::new(vec![(5, 1), (5, 1), (6, 1)], 8),
        ];
        for m in monomials {
            let sym = lattice_trace(&e8, &zero, &m, None, &t).unwrap();
            let brute = brute_force_lattice_z(&e8, &zero, &bracket_to_round(&m), &t).unwrap();
            assert_eq!(sym, brute, "monomial {m}");
        }
    }

    #[test]
    fn e8_numerators_are_e2_free() {
        // eta^8 Z(v, q) decomposes in C[E4, E6] for even-weight monomials.
        let e8 = Lattice::e8();
        let zero = CosetRep::zero(8);
        for m in [
            BracketMonomial::vacuum(8),
            BracketMonomial::new(vec![(1, 1), (1, 1)], 8),
            BracketMonomial::new(vec![(1, 1), (2, 1)], 8),
        ] {
            let wt = m.weight() as u32;
            let max_weight = wt + 4;
            let dim_bound = 16; // enough coefficients for weight <= 6
            let t = rat(dim_bound) - ratio(8, 24);
            let z = lattice_trace(&e8, &zero, &m, None, &t).unwrap();
            let numerator = z
                .mul(&eta_power(8, &rat(dim_bound)))
                .truncated(&rat(dim_bound));
            let f = qm_from_series(&numerator, max_weight).unwrap();
            assert_eq!(f.max_e2_degree().unwrap_or(0), 0, "monomial {m} gave {f}");
        }
    }

    #[test]
    fn primary_traces_match_theta_on_a1() {
        let a1 = Lattice::a1();
        let zero = CosetRep::zero(1);
        let t = rat(5);
        for p in [
            HarmonicPoly::constant(1),
            HarmonicPoly::new(Poly::variable(0, 1)).unwrap(),
        ] {
            let v = primary_state(&p, 1).unwrap();
            let lhs = brute_force_lattice_z(&a1, &zero, &v, &t).unwrap();
            let theta = theta_harmonic(&a1, &p, &(t.clone() + ratio(1, 24))).unwrap();
            let rhs = theta.mul(&eta_power(-1, &t)).truncated(&t);
            assert_eq!(lhs, rhs, "degree {}", p.degree());
        }
    }

    #[test]
    fn isotropic_primary_traces_on_e8() {
        let e8 = Lattice::e8();
        let zero = CosetRep::zero(8);
        let t = rat(2);
        let mut dir = vec![g(0); 8];
        dir[0] = g(1);
        dir[1] = GaussianRational::i();
        for k in [0u32, 2, 3] {
            let p = isotropic_power(&dir, k).unwrap();
            let v = primary_state(&p, 8).unwrap();
            let lhs = brute_force_lattice_z(&e8, &zero, &v, &t).unwrap();
            let theta = theta_harmonic(&e8, &p, &(t.clone() + ratio(8, 24))).unwrap();
            let rhs = theta.mul(&eta_power(-8, &t)).truncated(&t);
            assert_eq!(lhs, rhs, "k = {k}");
        }
    }
}

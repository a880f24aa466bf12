//! The rank-`d` free-boson Fock space: graded basis, mode actions, the
//! square-bracket change of basis, and the brute-force graded-trace oracle.
//!
//! States are monomials `a_{i_1}(-n_1) ... a_{i_k}(-n_k) 1` in creation modes
//! of `d` orthonormal directions; the weight-`n` graded piece has the
//! `d`-colored partitions of `n` as a basis. Zero-mode traces are evaluated
//! honestly: the zero mode of a monomial is expanded as the total-degree-zero
//! coefficient of its normal-ordered vertex operator, i.e. a sum over integer
//! mode tuples `(m_1, ..., m_k)` with `sum m_j = 0`, and the trace sums
//! diagonal matrix elements over the enumerated basis of each graded piece.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qseries::QSeries;
use crate::scalar::{binomial, rat, ratio, GaussianRational, Rational};

/// A basis monomial `prod a_i(-n) 1`, stored as a multiset of
/// `(direction, mode)` pairs with `1 <= direction <= rank` and `mode >= 1`.
/// Pairs are kept sorted descending by `(direction, mode)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockState {
    parts: Vec<(u32, u32)>,
    rank: u32,
}

impl FockState {
    pub fn vacuum(rank: u32) -> Self {
        FockState {
            parts: Vec::new(),
            rank,
        }
    }

    /// Build from `(direction, mode)` pairs; sorts into canonical order.
    pub fn new(mut parts: Vec<(u32, u32)>, rank: u32) -> Self {
        assert!(parts.iter().all(|(i, n)| *i >= 1 && *i <= rank && *n >= 1));
        parts.sort_by(|a, b| b.cmp(a));
        FockState { parts, rank }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn parts(&self) -> &[(u32, u32)] {
        &self.parts
    }

    /// Total L(0)-weight: the sum of the modes.
    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|(_, n)| *n as u64).sum()
    }

    /// Multiplicity of the part `(direction, mode)`.
    pub fn multiplicity(&self, direction: u32, mode: u32) -> u32 {
        self.parts
            .iter()
            .filter(|p| **p == (direction, mode))
            .count() as u32
    }

    fn with_part(&self, direction: u32, mode: u32) -> Self {
        let mut parts = self.parts.clone();
        parts.push((direction, mode));
        parts.sort_by(|a, b| b.cmp(a));
        FockState {
            parts,
            rank: self.rank,
        }
    }

    fn without_part(&self, direction: u32, mode: u32) -> Self {
        let mut parts = self.parts.clone();
        let idx = parts
            .iter()
            .position(|p| *p == (direction, mode))
            .expect("part present");
        parts.remove(idx);
        FockState {
            parts,
            rank: self.rank,
        }
    }

    /// Distinct parts with multiplicities, descending.
    pub fn part_counts(&self) -> Vec<(u32, u32, u32)> {
        let mut out: Vec<(u32, u32, u32)> = Vec::new();
        for (i, n) in &self.parts {
            match out.last_mut() {
                Some((li, ln, c)) if *li == *i && *ln == *n => *c += 1,
                _ => out.push((*i, *n, 1)),
            }
        }
        out
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n, c) in self.part_counts() {
            if c == 1 {
                write!(f, "h{i}(-{n}) ")?;
            } else {
                write!(f, "h{i}(-{n})^{c} ")?;
            }
        }
        write!(f, "vac")
    }
}

/// Finite linear combination of Fock basis states over the Gaussian
/// rationals; all states share one rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockVector {
    terms: BTreeMap<FockState, GaussianRational>,
    rank: u32,
}

impl FockVector {
    pub fn zero(rank: u32) -> Self {
        FockVector {
            terms: BTreeMap::new(),
            rank,
        }
    }

    pub fn vacuum(rank: u32) -> Self {
        Self::from_state(FockState::vacuum(rank), GaussianRational::one())
    }

    pub fn from_state(state: FockState, coeff: GaussianRational) -> Self {
        let rank = state.rank();
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(state, coeff);
        }
        FockVector { terms, rank }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockState, &GaussianRational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, state: &FockState) -> GaussianRational {
        self.terms
            .get(state)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.rank, rhs.rank, "rank mismatch");
        let mut terms = self.terms.clone();
        for (s, c) in &rhs.terms {
            let slot = terms
                .entry(s.clone())
                .or_insert_with(GaussianRational::zero);
            *slot += c;
            if slot.is_zero() {
                terms.remove(s);
            }
        }
        FockVector {
            terms,
            rank: self.rank,
        }
    }

    pub fn scaled(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank);
        }
        FockVector {
            terms: self.terms.iter().map(|(s, v)| (s.clone(), v * c)).collect(),
            rank: self.rank,
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scaled(&-GaussianRational::one()))
    }

    /// Largest state weight present (0 for the zero vector).
    pub fn max_weight(&self) -> u64 {
        self.terms.keys().map(|s| s.weight()).max().unwrap_or(0)
    }

    /// The common weight of all states, or `NotHomogeneous`.
    pub fn homogeneous_weight(&self) -> Result<u64> {
        let mut it = self.terms.keys().map(|s| s.weight());
        let Some(first) = it.next() else { return Ok(0) };
        for w in it {
            if w != first {
                return Err(Error::NotHomogeneous(first, w));
            }
        }
        Ok(first)
    }
}

/// All weight-`n` basis states of the rank-`d` Fock space, deterministically
/// ordered. These are the `d`-colored partitions of `n`.
pub fn enum_basis(d: u32, n: u64) -> Vec<FockState> {
    assert!(d >= 1, "rank must be at least 1");
    let mut out = Vec::new();
    let mut acc: Vec<(u32, u32)> = Vec::new();
    // Parts are chosen in non-increasing (mode, direction) order.
    fn recurse(
        d: u32,
        remaining: u64,
        max_part: (u32, u32),
        acc: &mut Vec<(u32, u32)>,
        out: &mut Vec<FockState>,
    ) {
        if remaining == 0 {
            out.push(FockState::new(
                acc.iter().map(|(m, i)| (*i, *m)).collect(),
                d,
            ));
            return;
        }
        let top = remaining.min(max_part.0 as u64) as u32;
        for m in (1..=top).rev() {
            let dir_top = if (m, d) <= max_part { d } else { max_part.1 };
            for i in (1..=dir_top).rev() {
                acc.push((m, i));
                recurse(d, remaining - m as u64, (m, i), acc, out);
                acc.pop();
            }
        }
    }
    recurse(d, n, (u32::MAX, d), &mut acc, &mut out);
    out
}

/// Act by the mode `a_i(n)` on a vector: `n < 0` adjoins a part, `n > 0`
/// removes one with the commutator factor `n * multiplicity`, and `n = 0`
/// annihilates everything.
pub fn apply_mode(direction: u32, n: i64, v: &FockVector) -> FockVector {
    assert!(
        direction >= 1 && direction <= v.rank(),
        "direction out of range"
    );
    if n == 0 {
        return FockVector::zero(v.rank());
    }
    let mut out = FockVector::zero(v.rank());
    for (state, coeff) in v.iter() {
        if n < 0 {
            let next = state.with_part(direction, (-n) as u32);
            out = out.add(&FockVector::from_state(next, coeff.clone()));
        } else {
            let mode = n as u32;
            let e = state.multiplicity(direction, mode);
            if e == 0 {
                continue;
            }
            let factor = GaussianRational::from_int((e as i64) * n);
            let next = state.without_part(direction, mode);
            out = out.add(&FockVector::from_state(next, &factor * coeff));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Square-bracket modes
// ---------------------------------------------------------------------------

/// Dense exact power series in `z`, used only for the bracket-mode
/// coefficient expansions.
fn zmul(a: &[Rational], b: &[Rational], order: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); order];
    for (i, ai) in a.iter().enumerate().take(order) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(order - i) {
            if !bj.is_zero() {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn zinv(a: &[Rational], order: usize) -> Vec<Rational> {
    assert!(!a[0].is_zero(), "constant term must be a unit");
    let lead = a[0].recip();
    let mut out = vec![Rational::zero(); order];
    out[0] = lead.clone();
    for k in 1..order {
        let mut acc = Rational::zero();
        for j in 1..=k.min(a.len() - 1) {
            acc += &a[j] * &out[k - j];
        }
        out[k] = -acc * &lead;
    }
    out
}

fn zpow(a: &[Rational], k: u32, order: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); order];
    out[0] = Rational::one();
    for _ in 0..k {
        out = zmul(&out, a, order);
    }
    out
}

/// Coefficients `c(w, j, m)` of `a[m] = sum_j c(w, j, m) a(j)` for
/// `j = m ... j_max`: the `z^j` coefficients of `(ln(1+z))^m (1+z)^{w-1}`.
fn bracket_expansion(w: i64, m: i64, j_max: i64) -> Vec<Rational> {
    if j_max < m {
        return Vec::new();
    }
    let order = (j_max - m + 1) as usize;
    // u = ln(1+z)/z = 1 - z/2 + z^2/3 - ...
    let u: Vec<Rational> = (0..order)
        .map(|j| {
            let sign = if j % 2 == 0 { 1 } else { -1 };
            ratio(sign, j as i64 + 1)
        })
        .collect();
    let u_m = if m >= 0 {
        zpow(&u, m as u32, order)
    } else {
        zpow(&zinv(&u, order), (-m) as u32, order)
    };
    let bin: Vec<Rational> = (0..order)
        .map(|j| Rational::from_integer(binomial(w - 1, j as u64)))
        .collect();
    zmul(&u_m, &bin, order)
}

/// The scalar `c(w, i, m)`: coefficient of `z^i` in `(ln(1+z))^m (1+z)^{w-1}`.
pub fn bracket_coeff(w: i64, m: i64, i: i64) -> Rational {
    if i < m {
        return Rational::zero();
    }
    bracket_expansion(w, m, i)[(i - m) as usize].clone()
}

/// A square-bracket monomial `a_{i_1}[-n_1] ... a_{i_k}[-n_k] 1`.
///
/// Negative bracket modes commute, so the factor list is kept sorted
/// descending by `(mode, direction)` as a canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BracketMonomial {
    factors: Vec<(u32, u32)>,
    rank: u32,
}

impl BracketMonomial {
    pub fn vacuum(rank: u32) -> Self {
        BracketMonomial {
            factors: Vec::new(),
            rank,
        }
    }

    /// Build from `(direction, mode)` factors with `mode >= 1`.
    pub fn new(factors: Vec<(u32, u32)>, rank: u32) -> Self {
        assert!(factors
            .iter()
            .all(|(i, n)| *i >= 1 && *i <= rank && *n >= 1));
        let mut m = BracketMonomial { factors, rank };
        m.canonicalize();
        m
    }

    fn canonicalize(&mut self) {
        self.factors.sort_by_key(|&(i, n)| std::cmp::Reverse((n, i)));
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Factors in canonical order, as `(direction, mode)` pairs.
    pub fn factors(&self) -> &[(u32, u32)] {
        &self.factors
    }

    /// Bracket weight `wt[v] = sum n_j`.
    pub fn weight(&self) -> u64 {
        self.factors.iter().map(|(_, n)| *n as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// All bracket monomials of the given weight, one per `d`-colored
    /// partition, deterministically ordered.
    pub fn enumerate(d: u32, weight: u64) -> Vec<BracketMonomial> {
        enum_basis(d, weight)
            .into_iter()
            .map(|s| BracketMonomial::new(s.parts().to_vec(), d))
            .collect()
    }

    /// Distinct factors with multiplicities, canonical order.
    pub fn factor_counts(&self) -> Vec<(u32, u32, u32)> {
        let mut out: Vec<(u32, u32, u32)> = Vec::new();
        for (i, n) in &self.factors {
            match out.last_mut() {
                Some((li, ln, c)) if *li == *i && *ln == *n => *c += 1,
                _ => out.push((*i, *n, 1)),
            }
        }
        out
    }
}

impl fmt::Display for BracketMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n, c) in self.factor_counts() {
            if c == 1 {
                write!(f, "h{i}[-{n}] ")?;
            } else {
                write!(f, "h{i}[-{n}]^{c} ")?;
            }
        }
        write!(f, "vac")
    }
}

/// Expand a bracket monomial in the round-mode basis, applying the factors
/// right to left to the vacuum. Each `a_i[-n]` is the infinite sum
/// `sum_{j >= -n} c(1, j, -n) a_i(j)`, which truncates because positive
/// modes lower the weight and eventually annihilate.
pub fn bracket_to_round(m: &BracketMonomial) -> FockVector {
    let mut v = FockVector::vacuum(m.rank());
    for (i, n) in m.factors().iter().rev() {
        let j_max = v.max_weight() as i64;
        let coeffs = bracket_expansion(1, -(*n as i64), j_max);
        let mut next = FockVector::zero(m.rank());
        for (offset, c) in coeffs.iter().enumerate() {
            let j = offset as i64 - *n as i64;
            if j == 0 || c.is_zero() {
                continue;
            }
            let applied = apply_mode(*i, j, &v);
            next = next.add(&applied.scaled(&GaussianRational::from_rational(c.clone())));
        }
        v = next;
    }
    v
}

/// `L(1) = sum_i sum_{k >= 1} h_i(1-k) h_i(k)` applied through mode actions.
pub fn virasoro_l1(v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(v.rank());
    let top = v.max_weight() as i64;
    for i in 1..=v.rank() {
        for k in 1..=top.max(0) {
            let lowered = apply_mode(i, k, v);
            if !lowered.is_zero() {
                out = out.add(&apply_mode(i, 1 - k, &lowered));
            }
        }
    }
    out
}

/// `L(2) = (1/2) sum_i h_i(1)^2 + sum_i sum_{k >= 2} h_i(2-k) h_i(k)`.
pub fn virasoro_l2(v: &FockVector) -> FockVector {
    let mut out = FockVector::zero(v.rank());
    let top = v.max_weight() as i64;
    let half = GaussianRational::from_rational(ratio(1, 2));
    for i in 1..=v.rank() {
        let once = apply_mode(i, 1, v);
        let twice = apply_mode(i, 1, &once);
        out = out.add(&twice.scaled(&half));
        for k in 2..=top.max(0) {
            let lowered = apply_mode(i, k, v);
            if !lowered.is_zero() {
                out = out.add(&apply_mode(i, 2 - k, &lowered));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Zero-mode traces
// ---------------------------------------------------------------------------

/// Annihilation multiset of a mode tuple: distinct `(direction, mode)` slots
/// with multiplicities, sorted.
pub(crate) type SlotKey = Vec<(u32, u32, u32)>;

/// One aggregated class of mode tuples for a monomial: the common
/// annihilation multiset `slots`, the per-direction count of zero modes
/// `zero_dirs` (empty in the boson case), and the summed coefficient
/// `prod_j binom(-m_j - 1, n_j - 1)` over all tuples in the class.
#[derive(Debug, Clone)]
pub(crate) struct TupleClass {
    pub slots: SlotKey,
    pub zero_dirs: Vec<u32>,
    pub coeff: BigInt,
}

/// Aggregate the zero-mode tuple expansion of a round monomial: all integer
/// tuples `(m_1, ..., m_k)` with `sum m_j = 0` whose creation and
/// annihilation multisets match (the only tuples with nonzero diagonal),
/// grouped by annihilation multiset and zero-mode pattern.
pub(crate) fn tuple_classes(
    parts: &[(u32, u32)],
    rank: u32,
    n_max: u64,
    allow_zero_modes: bool,
) -> Vec<TupleClass> {
    let nm = n_max as i64;
    // Per-position coefficient tables: coeff_tab[j][m + nm] = binom(-m-1, n_j-1).
    let coeff_tab: Vec<Vec<i128>> = parts
        .iter()
        .map(|(_, n)| {
            (-nm..=nm)
                .map(|m| {
                    binomial(-m - 1, (*n - 1) as u64)
                        .to_i128()
                        .expect("binomial fits i128")
                })
                .collect()
        })
        .collect();

    struct Search<'a> {
        parts: &'a [(u32, u32)],
        coeff_tab: &'a [Vec<i128>],
        nm: i64,
        allow_zero: bool,
        rank: u32,
        imbalance: BTreeMap<(u32, u32), i64>,
        imbalance_total: i64,
        annih: BTreeMap<(u32, u32), u32>,
        annih_w: i64,
        creat_w: i64,
        zero_dirs: Vec<u32>,
        out: BTreeMap<(SlotKey, Vec<u32>), BigInt>,
    }

    impl Search<'_> {
        fn bump_imbalance(&mut self, key: (u32, u32), delta: i64) {
            let slot = self.imbalance.entry(key).or_insert(0);
            self.imbalance_total -= slot.abs();
            *slot += delta;
            self.imbalance_total += slot.abs();
            if *slot == 0 {
                self.imbalance.remove(&key);
            }
        }

        fn recurse(&mut self, pos: usize, coeff: i128) {
            let k = self.parts.len();
            if pos == k {
                if self.imbalance_total == 0 {
                    let slots: SlotKey =
                        self.annih.iter().map(|((i, m), c)| (*i, *m, *c)).collect();
                    let entry = self
                        .out
                        .entry((slots, self.zero_dirs.clone()))
                        .or_insert_with(BigInt::zero);
                    *entry += BigInt::from(coeff);
                }
                return;
            }
            let remaining = (k - pos) as i64;
            if self.imbalance_total > remaining {
                return;
            }
            let dir = self.parts[pos].0;
            // zero mode
            if self.allow_zero {
                let c = self.coeff_tab[pos][self.nm as usize];
                if c != 0 {
                    self.zero_dirs[(dir - 1) as usize] += 1;
                    self.recurse(pos + 1, coeff * c);
                    self.zero_dirs[(dir - 1) as usize] -= 1;
                }
            }
            for m in 1..=self.nm {
                // annihilation a(m)
                if self.annih_w + m <= self.nm {
                    let c = self.coeff_tab[pos][(m + self.nm) as usize];
                    if c != 0 {
                        self.bump_imbalance((dir, m as u32), -1);
                        self.annih_w += m;
                        *self.annih.entry((dir, m as u32)).or_insert(0) += 1;
                        self.recurse(pos + 1, coeff * c);
                        let e = self.annih.get_mut(&(dir, m as u32)).expect("present");
                        *e -= 1;
                        if *e == 0 {
                            self.annih.remove(&(dir, m as u32));
                        }
                        self.annih_w -= m;
                        self.bump_imbalance((dir, m as u32), 1);
                    }
                }
                // creation a(-m)
                if self.creat_w + m <= self.nm {
                    let c = self.coeff_tab[pos][(self.nm - m) as usize];
                    if c != 0 {
                        self.bump_imbalance((dir, m as u32), 1);
                        self.creat_w += m;
                        self.recurse(pos + 1, coeff * c);
                        self.creat_w -= m;
                        self.bump_imbalance((dir, m as u32), -1);
                    }
                }
            }
        }
    }

    let mut search = Search {
        parts,
        coeff_tab: &coeff_tab,
        nm,
        allow_zero: allow_zero_modes,
        rank,
        imbalance: BTreeMap::new(),
        imbalance_total: 0,
        annih: BTreeMap::new(),
        annih_w: 0,
        creat_w: 0,
        zero_dirs: vec![0; rank as usize],
        out: BTreeMap::new(),
    };
    search.recurse(0, 1);
    let rank_usize = search.rank as usize;
    search
        .out
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|((slots, mut zero_dirs), coeff)| {
            zero_dirs.resize(rank_usize, 0);
            TupleClass {
                slots,
                zero_dirs,
                coeff,
            }
        })
        .collect()
}

/// Basis-dependent factor of a tuple class on the weight-`n` graded piece:
/// `sum_s prod_{(i,m,c)} m^c * e_s(i,m) (e_s(i,m)-1) ... (e_s(i,m)-c+1)`,
/// the sum over basis states of the diagonal annihilate-then-recreate
/// coefficients.
pub(crate) fn slot_trace_over_basis(states: &[FockState], slots: &SlotKey) -> BigInt {
    let mut total = BigInt::zero();
    'states: for s in states {
        let mut prod = BigInt::one();
        for (i, m, c) in slots {
            let e = s.multiplicity(*i, *m);
            if e < *c {
                continue 'states;
            }
            let mut factor = 1i128;
            for j in 0..*c {
                factor *= (*m as i128) * ((e - j) as i128);
            }
            prod *= BigInt::from(factor);
        }
        total += prod;
    }
    total
}

/// Process-wide memo of tuple classes: the expansion depends only on the
/// factor list, the rank, the weight horizon, and whether zero modes act.
pub(crate) fn tuple_classes_cached(
    parts: &[(u32, u32)],
    rank: u32,
    n_max: u64,
    allow_zero_modes: bool,
) -> Arc<Vec<TupleClass>> {
    type Key = (Vec<(u32, u32)>, u32, u64, bool);
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<Vec<TupleClass>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (parts.to_vec(), rank, n_max, allow_zero_modes);
    if let Some(hit) = cache.read().expect("tuple cache poisoned").get(&key) {
        return hit.clone();
    }
    let value = Arc::new(tuple_classes(parts, rank, n_max, allow_zero_modes));
    cache
        .write()
        .expect("tuple cache poisoned")
        .entry(key)
        .or_insert(value)
        .clone()
}

/// Process-wide memo of graded bases.
pub(crate) fn basis_cached(rank: u32, n: u64) -> Arc<Vec<FockState>> {
    type BasisMap = HashMap<(u32, u64), Arc<Vec<FockState>>>;
    static CACHE: OnceLock<RwLock<BasisMap>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(hit) = cache.read().expect("basis cache poisoned").get(&(rank, n)) {
        return hit.clone();
    }
    let value = Arc::new(enum_basis(rank, n));
    cache
        .write()
        .expect("basis cache poisoned")
        .entry((rank, n))
        .or_insert(value)
        .clone()
}

/// Process-wide memo of basis slot traces, keyed by rank, weight, and the
/// annihilation multiset.
pub(crate) fn slot_trace_cached(rank: u32, n: u64, slots: &SlotKey) -> BigInt {
    type Key = (u32, u64, SlotKey);
    static CACHE: OnceLock<RwLock<HashMap<Key, BigInt>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (rank, n, slots.clone());
    if let Some(hit) = cache.read().expect("slot cache poisoned").get(&key) {
        return hit.clone();
    }
    let states = basis_cached(rank, n);
    let value = slot_trace_over_basis(&states, slots);
    cache
        .write()
        .expect("slot cache poisoned")
        .entry(key)
        .or_insert(value)
        .clone()
}

/// Trace of the zero mode `o(v)` over the weight-`n` graded piece.
///
/// `v` must be homogeneous; `o` of each monomial is expanded by the mode
/// tuple sum described in the module docs, with creation modes ordered to
/// the left of annihilation modes, and the trace runs over `enum_basis`.
pub fn zero_mode_trace(v: &FockVector, n: u64) -> Result<GaussianRational> {
    v.homogeneous_weight()?;
    let mut total = GaussianRational::zero();
    for (state, coeff) in v.iter() {
        let classes = tuple_classes_cached(state.parts(), v.rank(), n, false);
        let mut monomial_trace = BigInt::zero();
        for class in classes.iter() {
            let s = slot_trace_cached(v.rank(), n, &class.slots);
            monomial_trace += &class.coeff * s;
        }
        let scalar = GaussianRational::from_rational(Rational::from_integer(monomial_trace));
        total += &(&scalar * coeff);
    }
    Ok(total)
}

/// The graded trace `Z(v, q) = sum_n tr_{M(1)_n} o(v) q^{n - d/24}`, exact
/// below `t`, computed by brute force over the enumerated bases.
///
/// The zero mode extends linearly, so `v` may mix round weights (bracket
/// monomials expand to such mixtures); each monomial contributes the trace
/// of its own zero mode.
pub fn brute_force_z(v: &FockVector, t: &Rational) -> Result<QSeries> {
    let d = v.rank() as i64;
    let top = t + ratio(d, 24);
    let mut terms: Vec<(Rational, GaussianRational)> = Vec::new();
    // Build tuple classes once per monomial at the largest weight needed.
    let mut n_max: i64 = -1;
    let mut n = 0i64;
    while rat(n) < top {
        n_max = n;
        n += 1;
    }
    if n_max < 0 {
        return Ok(QSeries::zero(t));
    }
    let per_monomial: Vec<(GaussianRational, Arc<Vec<TupleClass>>)> = v
        .iter()
        .map(|(state, coeff)| {
            (
                coeff.clone(),
                tuple_classes_cached(state.parts(), v.rank(), n_max as u64, false),
            )
        })
        .collect();
    for n in 0..=n_max {
        let mut value = GaussianRational::zero();
        for (coeff, classes) in &per_monomial {
            let mut monomial_trace = BigInt::zero();
            for class in classes.iter() {
                let s = slot_trace_cached(v.rank(), n as u64, &class.slots);
                monomial_trace += &class.coeff * s;
            }
            let scalar = GaussianRational::from_rational(Rational::from_integer(monomial_trace));
            value += &(&scalar * coeff);
        }
        if !value.is_zero() {
            terms.push((rat(n) - ratio(d, 24), value));
        }
    }
    Ok(QSeries::from_terms(terms, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modforms::{eisenstein, eta_power, qm_to_series, QuasiModular};

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    fn gr(n: i64, d: i64) -> GaussianRational {
        GaussianRational::from_rational(ratio(n, d))
    }

    #[test]
    fn basis_sizes_are_colored_partitions() {
        // d = 1: partition numbers
        let p = [1usize, 1, 2, 3, 5, 7, 11];
        for (n, expect) in p.iter().enumerate() {
            assert_eq!(enum_basis(1, n as u64).len(), *expect, "p({n})");
        }
        // d = 2, n = 2: h1(-2), h2(-2), h1(-1)^2, h1(-1)h2(-1), h2(-1)^2
        assert_eq!(enum_basis(2, 2).len(), 5);
        // d = 3, n = 0: vacuum only
        let vac = enum_basis(3, 0);
        assert_eq!(vac, vec![FockState::vacuum(3)]);
        // sizes match the eta generating function for d = 2
        let inv2 = eta_power(-2, &rat(8));
        for n in 0..8 {
            let exp = ratio(24 * n - 2, 24);
            assert_eq!(
                g(enum_basis(2, n as u64).len() as i64),
                inv2.coeff(&exp).unwrap(),
                "dim M(1)_{n} at d=2"
            );
        }
    }

    #[test]
    fn mode_actions() {
        let rank = 2;
        let v = apply_mode(1, -1, &FockVector::vacuum(rank));
        // h1(1) h1(-1) vac = vac
        assert_eq!(apply_mode(1, 1, &v), FockVector::vacuum(rank));
        // h1(1) h2(-1) vac = 0
        let w = apply_mode(2, -1, &FockVector::vacuum(rank));
        assert!(apply_mode(1, 1, &w).is_zero());
        // h1(-2) h1(-1) vac is a single state
        let u = apply_mode(1, -2, &v);
        let expected = FockState::new(vec![(1, 1), (1, 2)], rank);
        assert_eq!(u.coeff(&expected), g(1));
        // h1(0) annihilates
        assert!(apply_mode(1, 0, &v).is_zero());
    }

    #[test]
    fn mode_commutators() {
        // [a_i(m), a_j(n)] = m delta_{m+n,0} delta_{ij} on random low states
        let rank = 2;
        let states: Vec<FockVector> = enum_basis(2, 4)
            .into_iter()
            .map(|s| FockVector::from_state(s, g(1)))
            .collect();
        for v in &states {
            for i in 1..=rank {
                for j in 1..=rank {
                    for m in [-3i64, -1, 1, 2, 3] {
                        for n in [-3i64, -2, 1, 3] {
                            let ab = apply_mode(i, m, &apply_mode(j, n, v));
                            let ba = apply_mode(j, n, &apply_mode(i, m, v));
                            let bracket = ab.sub(&ba);
                            let expected = if m + n == 0 && i == j {
                                v.scaled(&g(m))
                            } else {
                                FockVector::zero(rank)
                            };
                            assert_eq!(bracket, expected, "i={i} j={j} m={m} n={n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bracket_coefficients() {
        for w in [1i64, 2, 3, 7] {
            for m in [-3i64, -1, 0, 1, 2] {
                assert_eq!(
                    bracket_coeff(w, m, m),
                    Rational::one(),
                    "c(w,m,m) w={w} m={m}"
                );
            }
            for i in 0..5 {
                assert_eq!(
                    bracket_coeff(w, 0, i),
                    Rational::from_integer(binomial(w - 1, i as u64)),
                    "c(w,i,0) w={w} i={i}"
                );
            }
        }
        // (ln(1+z))^{-1} = z^{-1} + 1/2 - z/12 + ...
        assert_eq!(bracket_coeff(1, -1, 0), ratio(1, 2));
        assert_eq!(bracket_coeff(1, -1, 1), ratio(-1, 12));
        // (ln(1+z))^{-2} = z^{-2} + z^{-1} + ...
        assert_eq!(bracket_coeff(1, -2, -1), Rational::one());
        assert_eq!(bracket_coeff(1, -2, 1), Rational::zero());
    }

    #[test]
    fn bracket_to_round_examples() {
        let rank = 1;
        // a[-1] vac = a(-1) vac
        let m1 = BracketMonomial::new(vec![(1, 1)], rank);
        let v1 = bracket_to_round(&m1);
        assert_eq!(
            v1,
            FockVector::from_state(FockState::new(vec![(1, 1)], rank), g(1))
        );
        // a[-1]^2 vac = a(-1)^2 vac - (1/12) vac
        let m2 = BracketMonomial::new(vec![(1, 1), (1, 1)], rank);
        let v2 = bracket_to_round(&m2);
        assert_eq!(v2.coeff(&FockState::new(vec![(1, 1), (1, 1)], rank)), g(1));
        assert_eq!(v2.coeff(&FockState::vacuum(rank)), gr(-1, 12));
        assert_eq!(v2.num_terms(), 2);
        // a[-2] vac = a(-2) vac + a(-1) vac
        let m3 = BracketMonomial::new(vec![(1, 2)], rank);
        let v3 = bracket_to_round(&m3);
        assert_eq!(v3.coeff(&FockState::new(vec![(1, 2)], rank)), g(1));
        assert_eq!(v3.coeff(&FockState::new(vec![(1, 1)], rank)), g(1));
        assert_eq!(v3.num_terms(), 2);
    }

    #[test]
    fn bracket_leading_term_is_round_monomial() {
        for d in [1u32, 2] {
            for w in 0..=5u64 {
                for m in BracketMonomial::enumerate(d, w) {
                    let v = bracket_to_round(&m);
                    let leading = FockState::new(m.factors().to_vec(), d);
                    assert_eq!(v.coeff(&leading), g(1), "monomial {m}");
                    for (s, _) in v.iter() {
                        assert!(s.weight() <= w);
                        assert!(s == &leading || s.weight() < w, "lower terms only: {m}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_mode_of_identity_counts_states() {
        let v = FockVector::vacuum(1);
        assert_eq!(zero_mode_trace(&v, 4).unwrap(), g(5)); // p(4) = 5
        let v2 = FockVector::vacuum(3);
        assert_eq!(zero_mode_trace(&v2, 0).unwrap(), g(1));
    }

    #[test]
    fn zero_mode_of_heisenberg_generator_vanishes() {
        let v = FockVector::from_state(FockState::new(vec![(1, 1)], 1), g(1));
        for n in 0..6 {
            assert_eq!(zero_mode_trace(&v, n).unwrap(), g(0));
        }
    }

    #[test]
    fn zero_mode_of_weight_two_state() {
        // o(a(-1)^2 vac) = a(0)^2 + 2 sum_{k>=1} a(-k)a(k): eigenvalue 2n.
        let v = FockVector::from_state(FockState::new(vec![(1, 1), (1, 1)], 1), g(1));
        assert_eq!(zero_mode_trace(&v, 3).unwrap(), g(18)); // 2*3*p(3)
        for n in 1..6u64 {
            let p = enum_basis(1, n).len() as i64;
            assert_eq!(zero_mode_trace(&v, n).unwrap(), g(2 * n as i64 * p));
        }
    }

    #[test]
    fn odd_factor_count_traces_vanish() {
        for d in [1u32, 2] {
            for w in 1..=5u64 {
                for s in enum_basis(d, w) {
                    if s.parts().len() % 2 == 1 {
                        let v = FockVector::from_state(s.clone(), g(1));
                        for n in 0..=6u64 {
                            assert_eq!(zero_mode_trace(&v, n).unwrap(), g(0), "state {s}, n={n}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_weight_vectors_are_rejected() {
        let v = FockVector::vacuum(1).add(&FockVector::from_state(
            FockState::new(vec![(1, 1)], 1),
            g(1),
        ));
        assert!(matches!(
            zero_mode_trace(&v, 2),
            Err(Error::NotHomogeneous(_, _))
        ));
        // brute_force_z extends linearly instead: Z(vac + a(-1)vac) = Z(vac).
        let z = brute_force_z(&v, &rat(3)).unwrap();
        assert_eq!(z, brute_force_z(&FockVector::vacuum(1), &rat(3)).unwrap());
    }

    #[test]
    fn virasoro_zero_mode_reads_weight() {
        // omega = (1/2) sum_i h_i(-1)^2 vac; tr o(omega) on M(1)_n = n dim.
        for d in [1u32, 2] {
            let mut omega = FockVector::zero(d);
            for i in 1..=d {
                omega = omega.add(&FockVector::from_state(
                    FockState::new(vec![(i, 1), (i, 1)], d),
                    gr(1, 2),
                ));
            }
            for n in 0..6u64 {
                let dim = enum_basis(d, n).len() as i64;
                assert_eq!(
                    zero_mode_trace(&omega, n).unwrap(),
                    g(n as i64 * dim),
                    "d={d} n={n}"
                );
            }
        }
    }

    #[test]
    fn character_is_eta_inverse() {
        let t = ratio(8 * 24 - 1, 24);
        let z = brute_force_z(&FockVector::vacuum(1), &t).unwrap();
        assert_eq!(z, eta_power(-1, &t));
        let t2 = ratio(6 * 24 - 2, 24);
        let z2 = brute_force_z(&FockVector::vacuum(2), &t2).unwrap();
        assert_eq!(z2, eta_power(-2, &t2));
    }

    #[test]
    fn bracket_square_gives_e2_over_eta() {
        // Z(a[-1]^2 vac) = E2 / eta
        let t = ratio(8 * 24 - 1, 24);
        let m = BracketMonomial::new(vec![(1, 1), (1, 1)], 1);
        let z = brute_force_z(&bracket_to_round(&m), &t).unwrap();
        let expected = eisenstein(2, &rat(9)).unwrap().mul(&eta_power(-1, &t));
        assert_eq!(z, expected);
        // and in quasi-modular form via the ring expansion
        let also = qm_to_series(&QuasiModular::e2(), &rat(9)).mul(&eta_power(-1, &t));
        assert_eq!(z, also);
    }

    #[test]
    fn odd_bracket_weight_vanishes_in_brute_force() {
        let t = ratio(6 * 24 - 1, 24);
        let m = BracketMonomial::new(vec![(1, 2), (1, 1)], 1);
        let z = brute_force_z(&bracket_to_round(&m), &t).unwrap();
        assert!(z.is_zero(), "Z(a[-2]a[-1]vac) = {z}");
    }
}

//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by series, modular-form, Fock-space, and lattice operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Reciprocal of a series that is zero to the displayed order.
    #[error("series is zero to the displayed order and cannot be inverted")]
    NonInvertible,

    /// `eval_at_tau` requires Im(tau) > 0.
    #[error("tau must lie in the upper half plane (Im tau = {0})")]
    NotUpperHalfPlane(f64),

    /// Eisenstein weights must be even and at least 2.
    #[error("bad Eisenstein weight {0}: must be even and >= 2")]
    BadWeight(i64),

    /// The Eisenstein rewriting solve was inconsistent. Indicates a bug.
    #[error("linear solve for E_{0} in terms of E4/E6 was inconsistent")]
    SolveFailed(i64),

    /// A q-expansion does not lie in C[E2,E4,E6] up to the checked precision.
    #[error("series does not decompose in C[E2,E4,E6]: {0}")]
    NotInRing(String),

    /// Too few exact coefficients to overdetermine a decomposition.
    #[error("series truncation too small: need {need} coefficients, have {have}")]
    InsufficientPrecision { need: usize, have: usize },

    /// Trace of a vector that mixes L(0)-weights.
    #[error("vector is not homogeneous: mixes weights {0} and {1}")]
    NotHomogeneous(u64, u64),

    /// Gram matrix failed the Cholesky-style decomposition.
    #[error("gram matrix is not positive definite")]
    NotPositiveDefinite,

    /// Isotropic powers need sum t_i^2 = 0.
    #[error("direction vector is not isotropic: sum of squares is nonzero")]
    NotIsotropic,

    /// A polynomial that was required to be harmonic is not.
    #[error("polynomial is not annihilated by the Laplacian")]
    NotHarmonic,

    /// The Virasoro guard on a primary state failed. Indicates a bug.
    #[error("internal primary-state check failed: {0}")]
    InternalPrimaryCheckFailed(String),

    /// Invalid Gram matrix in a lattice description.
    #[error("bad gram matrix: {0}")]
    BadGram(String),

    /// Embedding does not reproduce the Gram matrix (up to a rational scale).
    #[error("bad embedding: {0}")]
    BadEmbedding(String),

    /// Operation needs an orthonormal-frame embedding the lattice lacks.
    #[error(
        "lattice has no orthonormal-frame embedding; supply one to use frame-dependent operations"
    )]
    NoEmbedding,

    /// A coset shift that does not pair integrally with the lattice.
    #[error("bad coset representative: {0}")]
    BadCoset(String),

    /// A weighted sum picked up an irrational contribution that did not cancel.
    #[error(
        "odd-degree frame contribution did not cancel and the frame scale is not a perfect square"
    )]
    IrrationalValue,

    /// Malformed rational or Gaussian-rational literal.
    #[error("cannot parse number {0:?}")]
    BadNumber(String),
}

pub type Result<T> = std::result::Result<T, Error>;

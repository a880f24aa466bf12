//! Exact-arithmetic engine for one-point trace functions of free-boson and
//! lattice vertex operator algebras.
//!
//! The crate computes graded traces `Z(v,q) = tr o(v) q^{L(0)-c/24}` two ways
//! and checks them against each other:
//!
//! * a symbolic route that reduces square-bracket monomials to polynomials in
//!   the Eisenstein series `E2, E4, E6` over powers of the Dedekind eta
//!   function ([`zhu`], [`lattice`]);
//! * a brute-force route that enumerates graded basis states and takes honest
//!   operator traces ([`fock`], [`lattice`]).
//!
//! Everything is exact: coefficients are Gaussian rationals, exponents are
//! rationals with bounded denominators, and floating point appears only in
//! [`QSeries::eval_at_tau`].

#![forbid(unsafe_code)]

pub mod error;
pub mod fock;
pub mod lattice;
pub mod modforms;
pub mod qseries;
pub mod scalar;
pub mod zhu;

pub use error::{Error, Result};
pub use fock::{BracketMonomial, FockState, FockVector};
pub use lattice::{CosetRep, HarmonicPoly, Lattice, PairingPolynomial, Poly};
pub use modforms::{BernoulliCache, QuasiModular};
pub use qseries::QSeries;
pub use scalar::{GaussianRational, Rational};
pub use zhu::BosonTraceResult;

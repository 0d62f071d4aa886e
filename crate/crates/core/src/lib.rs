//! Numerical laboratory for the twisted XXX spin-1/2 chain.
//!
//! The crate builds the transfer matrix and its fusion hierarchy from the
//! rational r-matrix, constructs Baxter's Q-operator as an analytically
//! continued trace over a Verma module, and solves the twisted quantum
//! Wronskian for complete sets of Bethe roots. Every functional relation is
//! cross-checked against brute-force diagonalization on small chains.
//!
//! Spectral parameters are in the λ-convention (`r(λ) = λ + P`) unless a
//! function name says otherwise; [`lattice::u_to_lambda`] and
//! [`lattice::lambda_to_u`] convert to the `u`-convention
//! (`r̃(u) = u − i/2 + iP`).

pub mod error;
pub mod fusion;
pub mod lattice;
pub mod linalg;
pub mod poly;
pub mod tables;
pub mod verma;
pub mod wronskian;

mod aux;

pub use error::{Error, Result};
pub use lattice::{ChainConfig, Convention, OperatorPoly, SpectrumRecord, SpinSector};
pub use num_complex::Complex64;
pub use poly::CPoly;
pub use wronskian::{PSPair, QPair};

/// Convenience constructor for a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

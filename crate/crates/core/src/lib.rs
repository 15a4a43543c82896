//! Uniqueness analysis and recovery for sparse phase retrieval from
//! autocorrelation measurements.
//!
//! A signal made of `N` weighted Dirac deltas is observed only through its
//! autocorrelation function (ACF), i.e. through the magnitude of its Fourier
//! transform. This crate decides when that observation pins the signal down
//! to a single equivalence class (translation, point reflection, global sign)
//! and performs the reconstruction:
//!
//! - [`signal`]: spike trains, ACF construction, collision detection and
//!   canonicalization under the equivalence class;
//! - [`turnpike`]: 1-D support recovery by backtracking over the difference
//!   multiset, plus the six-point parametric family of homometric
//!   counterexample pairs;
//! - [`coefficients`]: coefficient recovery through rank-one matrix
//!   completion and the log-linear disambiguation of the two counterexample
//!   supports;
//! - [`multidim`]: D-dimensional recovery via projections onto random 1-D
//!   subspaces, and the visibility (general position) checker;
//! - [`oracle`]: independent brute-force verifiers used to validate the
//!   solvers at desk scale.
//!
//! All arithmetic is generic over [`Scalar`], with two shipped
//! implementations: exact big rationals and `f64` with an explicit matching
//! tolerance. The crate is `no_std` (alloc only); IO, file formats and the
//! CLI live in the companion `sparsepr` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coefficients;
pub mod error;
mod linalg;
pub mod multidim;
pub mod oracle;
pub mod scalar;
pub mod signal;
pub mod turnpike;

pub use coefficients::{classify_uniqueness_1d, recover_coefficients, UniquenessVerdict};
pub use error::Error;
pub use scalar::{Rational, Scalar, Tolerance};
pub use signal::{canonicalize, compute_acf, DeltaAcf, EquivalenceClass, Spike, SpikeSignal};
pub use turnpike::{solve_turnpike, support_uniqueness, DifferenceMultiset, SupportVerdict};

/// Convenience alias for results carrying the crate error type.
pub type Result<T> = core::result::Result<T, Error>;

//! Gaussian-state simulator for a four-mode parametric amplifier operated
//! below threshold, together with the pulsed-heterodyne measurement model and
//! the rotation-invariant estimators needed to recover entanglement,
//! physicality, and purity from phase-diffused data.
//!
//! The crate is organized along the physical pipeline:
//!
//! * [`gaussian`]: covariance matrices, symplectic transforms, and the
//!   determinant-based entanglement/physicality/purity functionals.
//! * [`mopo`]: the four-mode coupling matrix, its Bloch-Messiah
//!   factorization, vacuum evolution, and the gain-curve fit.
//! * [`detection`]: the heterodyne channel (one added vacuum unit), its
//!   inversion, mode mismatch, per-cycle phase rotations, and a synthetic
//!   demodulation chain for validating the detection algebra on time series.
//! * [`cycles`]: Monte Carlo emulation of the pulsed experiment: seeded,
//!   thread-count-independent cycle sampling plus dataset persistence.
//! * [`estimators`]: pooled-variance and per-cycle-determinant estimators
//!   with vacuum (SQL) normalization and bootstrap standard errors.
//!
//! The [`guide`] module mirrors the mdbook under `book/`; its chapters double
//! as doc-tests so every snippet in the book keeps compiling.

pub mod cycles;
pub mod detection;
mod error;
pub mod estimators;
pub mod gaussian;
pub mod guide;
pub mod mopo;

pub use error::{Error, Result};

/// Re-exported so downstream code can name the matrix types that appear in
/// this crate's API without pinning its own nalgebra version.
pub use nalgebra;

/// Outcome of an operation that degrades gracefully instead of failing.
///
/// The value is always usable; `flagged` records that a documented guard
/// tripped (a non-physical input, p/q asymmetry beyond tolerance, a
/// degenerate sample set, ...). Each producing operation documents what its
/// flag means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub flagged: bool,
}

impl<T> Flagged<T> {
    pub fn clean(value: T) -> Self {
        Flagged { value, flagged: false }
    }

    pub fn tripped(value: T) -> Self {
        Flagged { value, flagged: true }
    }
}

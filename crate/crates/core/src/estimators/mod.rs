//! Phase-robust estimators for cycle datasets.
//!
//! The measured quadratures carry unknown phases that change every cycle, so
//! raw cross-covariances average to zero over a run. What survives phase
//! diffusion are rotation invariants: per-mode variances (pooled over all
//! samples) and the determinant of the cross-covariance block (computed per
//! cycle, then averaged). This module normalizes both against the measured
//! vacuum level, undoes the vacuum unit added by heterodyne detection, and
//! assembles the witness, physicality, and purity figures with bootstrap
//! standard errors.
//!
//! Estimator choices that matter:
//!
//! * The per-cycle cross determinant is the U-statistic
//!   `det(Σ ũ w̃ᵀ) / ((n−1)(n−2))` over centered samples. It is exactly
//!   unbiased for `Det C` at any sample count and exactly invariant under
//!   per-cycle quadrature rotations, so no per-cycle bias correction enters
//!   the pipeline.
//! * Per-mode determinants use the pooled path `Det A_i = a_i²` with the
//!   pooled p-q cross term discarded; the naive per-cycle determinant of the
//!   mode block underestimates `Det A` at small sample counts and is kept
//!   only as the [`cycle_mode_determinant`] diagnostic.

mod calibration;
mod cycle_stats;
mod summary;

pub use calibration::SqlCalibration;
pub use cycle_stats::{cycle_cross_determinant, cycle_mode_determinant};
pub use summary::{
    pooled_autocovariance, summarize, summarize_dataset, summarize_with, GainSource,
    InvariantSummary, PooledAutocovariance,
};

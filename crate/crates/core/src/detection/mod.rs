//! Pulsed heterodyne detection model.
//!
//! Shifting the optical local oscillator by the analysis frequency and
//! demodulating the photocurrent in quadrature gives simultaneous access to
//! both quadratures of each detected mode at the cost of mixing in one unit
//! of vacuum: the measured covariance matrix is `V′ = (V + I)/2`, the same
//! map as a 50% lossy detector. [`correct_added_vacuum`] inverts it exactly
//! at the matrix level.
//!
//! Two further experimental realities live here: an imperfect spatial
//! overlap between the amplified modes scales the cross-correlations down
//! ([`apply_mode_mismatch`]), and slow interferometric drift randomizes the
//! measured quadrature angles from cycle to cycle
//! ([`random_phase_rotation`]).
//!
//! The covariance-level maps are the primary path. [`demodulation_chain`]
//! is the validation path: it runs the actual mix-filter-decimate signal
//! processing on synthetic photocurrent series and must agree statistically
//! with the covariance algebra.

mod channel;
mod demod;

pub use channel::{
    apply_mode_mismatch, correct_added_vacuum, heterodyne_channel, random_phase_rotation,
    DetectionConfig, ADDED_VACUUM_ETA,
};
pub use demod::{
    boxcar_len, demodulation_chain, synthesize_quadrature_tone, vacuum_noise_std,
    DemodSamplePair,
};

//! Four-mode parametric amplifier model.
//!
//! The device couples four optical modes pairwise through a symmetric
//! coupling matrix `X` with a fixed zero pattern (modes 1-4 and 2-3 are
//! never coupled directly). Heisenberg evolution of the mode operators,
//! `da/dt = X a†`, turns vacuum input into a four-mode Gaussian state whose
//! p quadratures evolve by `exp(Xτ)` and q quadratures by `exp(−Xτ)`.
//!
//! The same matrix admits a Bloch-Messiah style factorization into two
//! independent squeeze rates (λ1, λ2) and two effective beam-splitter
//! transmissions (t1, t2); [`chis_from_bloch_messiah`] and [`bloch_messiah`]
//! convert between the two descriptions. Pump power enters through a single
//! scale: every coupling is proportional to κ√I, so gain curves are
//! hyperbolic cosines in √intensity.

mod coupling;
mod evolution;
mod fit;

pub use coupling::{
    assemble_coupling, bloch_messiah, chis_from_bloch_messiah, BlochMessiahFactors,
    CouplingMatrix, InteractionSetting,
};
pub use evolution::{
    average_gain, balanced_closed_form, evolution_symplectic, output_covariance,
};
pub use fit::{fit_gain_curve, GainFit};

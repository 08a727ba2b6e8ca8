use serde::Serialize;

use crate::error::{Error, Result};
use crate::Flagged;

use super::covariance::CovarianceMatrix;

/// Block determinants and the derived entanglement/physicality/purity
/// functionals of one two-mode covariance matrix.
///
/// `det_v` is the direct 4×4 determinant, so the report is meaningful for
/// arbitrary (also rotated or noisy, non-symmetric-form) inputs.
/// `input_physical` records whether the input passed the `V + iΩ ≥ 0` check;
/// non-physical estimates are reported, not rejected. For pathological
/// inputs with `det_v ≤ 0` the purity field is set to 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessReport {
    pub det_a1: f64,
    pub det_a2: f64,
    pub det_c: f64,
    pub det_v: f64,
    pub w: f64,
    pub w_ppt: f64,
    pub nu_tilde_minus: f64,
    pub purity: f64,
    pub input_physical: bool,
}

impl WitnessReport {
    pub fn from_covariance(v: &CovarianceMatrix) -> Result<Self> {
        let (det_a1, det_a2, det_c, det_v) = block_determinants(v)?;
        let (w, w_ppt) = witnesses_from_invariants(det_a1, det_a2, det_c, det_v);
        let nu = nu_tilde_minus_from_invariants(det_a1, det_a2, det_c, det_v);
        let purity = if det_v > 0.0 {
            det_v.sqrt().recip()
        } else {
            0.0
        };
        Ok(WitnessReport {
            det_a1,
            det_a2,
            det_c,
            det_v,
            w,
            w_ppt,
            nu_tilde_minus: nu.value,
            purity,
            input_physical: v.is_physical() && !nu.flagged,
        })
    }
}

fn block_determinants(v: &CovarianceMatrix) -> Result<(f64, f64, f64, f64)> {
    if v.n_modes() != 2 {
        return Err(Error::invalid(format!(
            "two-mode witness needs a 4x4 covariance matrix, got {} modes",
            v.n_modes()
        )));
    }
    let det_a1 = v.mode_block(0)?.determinant();
    let det_a2 = v.mode_block(1)?.determinant();
    let det_c = v.cross_block(0, 1)?.determinant();
    let det_v = v.matrix().determinant();
    Ok((det_a1, det_a2, det_c, det_v))
}

/// Physicality and entanglement tests from the block determinants:
/// `W = 1 + Det V − 2 Det C − Det A1 − Det A2` (negative only for matrices
/// that describe no quantum state) and
/// `W_PPT = 1 + Det V + 2 Det C − Det A1 − Det A2` (negative exactly for
/// entangled two-mode Gaussian states).
pub fn witness_pair(v: &CovarianceMatrix) -> Result<(f64, f64)> {
    let (det_a1, det_a2, det_c, det_v) = block_determinants(v)?;
    Ok(witnesses_from_invariants(det_a1, det_a2, det_c, det_v))
}

/// Same `(W, W_PPT)` pair computed from already-known block determinants,
/// for estimators that never hold the full matrix.
pub fn witnesses_from_invariants(det_a1: f64, det_a2: f64, det_c: f64, det_v: f64) -> (f64, f64) {
    let w = 1.0 + det_v - 2.0 * det_c - det_a1 - det_a2;
    let w_ppt = 1.0 + det_v + 2.0 * det_c - det_a1 - det_a2;
    (w, w_ppt)
}

/// Smallest symplectic eigenvalue ν̃− of the partially transposed matrix
/// (partial transposition = q-sign flip on mode 2, a `diag(1,1,1,−1)`
/// congruence). ν̃− < 1 iff the state is entangled, and `sign(ν̃− − 1)`
/// agrees with `sign(W_PPT)` for physical states.
///
/// The flag marks a non-physical input (including inputs whose PT invariants
/// leave the symplectic spectrum complex); the returned value is then the
/// clamped real part and should be read as a diagnostic only.
pub fn ppt_symplectic_eigenvalue(v: &CovarianceMatrix) -> Result<Flagged<f64>> {
    let (det_a1, det_a2, det_c, det_v) = block_determinants(v)?;
    let nu = nu_tilde_minus_from_invariants(det_a1, det_a2, det_c, det_v);
    if v.is_physical() && !nu.flagged {
        Ok(Flagged::clean(nu.value))
    } else {
        Ok(Flagged::tripped(nu.value))
    }
}

/// ν̃− from the symplectic invariants of the partially transposed matrix:
/// Δ̃ = Det A1 + Det A2 − 2 Det C and ν̃±² = (Δ̃ ± √(Δ̃² − 4 Det V))/2.
fn nu_tilde_minus_from_invariants(
    det_a1: f64,
    det_a2: f64,
    det_c: f64,
    det_v: f64,
) -> Flagged<f64> {
    let delta = det_a1 + det_a2 - 2.0 * det_c;
    let disc = delta * delta - 4.0 * det_v;
    let scale = delta.abs().max(det_v.abs()).max(1.0);
    let complex_spectrum = disc < -1e-12 * scale;
    let nu_sq = ((delta - disc.max(0.0).sqrt()) / 2.0).max(0.0);
    let value = nu_sq.sqrt();
    if complex_spectrum {
        Flagged::tripped(value)
    } else {
        Flagged::clean(value)
    }
}

/// Det V for states in the symmetric two-mode form (diagonal single-mode
/// blocks `a_i`, cross block `diag(c, −c)`): `(√(Det A1 · Det A2) − |Det C|)²`.
pub fn det_v_symmetric(det_a1: f64, det_a2: f64, det_c: f64) -> Result<f64> {
    if det_a1 < 0.0 || det_a2 < 0.0 {
        return Err(Error::invalid(format!(
            "det_v_symmetric needs non-negative single-mode determinants, got ({det_a1}, {det_a2})"
        )));
    }
    let root = (det_a1 * det_a2).sqrt() - det_c.abs();
    Ok(root * root)
}

/// Purity of a Gaussian state, `μ = 1/√Det V`.
pub fn purity(det_v: f64) -> Result<f64> {
    if det_v <= 0.0 {
        return Err(Error::invalid(format!(
            "purity needs det_v > 0, got {det_v}"
        )));
    }
    Ok(det_v.sqrt().recip())
}

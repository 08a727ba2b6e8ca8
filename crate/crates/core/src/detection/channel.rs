use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;
use crate::Flagged;

/// Effective detector efficiency of in-quadrature heterodyne readout. Fixed
/// by the measurement scheme itself (one vacuum unit enters through the
/// image band), not a tunable parameter.
pub const ADDED_VACUUM_ETA: f64 = 0.5;

/// Electronic and optical parameters of the heterodyne receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    /// Offset between optical local oscillator and pump, Hz.
    pub analysis_frequency: f64,
    /// Single-sided width of the demodulation low-pass, Hz. Matches the
    /// gain linewidth of the medium, a few tens of kHz.
    pub lowpass_bandwidth: f64,
    /// Phase of the optical local oscillator, radians.
    pub optical_phase: f64,
    /// Phase of the electronic demodulation references, radians.
    pub electronic_phase: f64,
    /// Amplitude overlap between the two amplified modes, in [0, 1].
    /// Multiplies cross-correlations only.
    pub mode_mismatch: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            analysis_frequency: 5e6,
            lowpass_bandwidth: 2e4,
            optical_phase: 0.0,
            electronic_phase: 0.0,
            mode_mismatch: 0.65,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.analysis_frequency.is_finite() && self.analysis_frequency > 0.0) {
            return Err(Error::invalid(format!(
                "analysis_frequency must be > 0 Hz, got {}",
                self.analysis_frequency
            )));
        }
        if !(self.lowpass_bandwidth.is_finite() && self.lowpass_bandwidth > 0.0) {
            return Err(Error::invalid(format!(
                "lowpass_bandwidth must be > 0 Hz, got {}",
                self.lowpass_bandwidth
            )));
        }
        if !(self.optical_phase.is_finite() && self.electronic_phase.is_finite()) {
            return Err(Error::invalid("phases must be finite"));
        }
        check_mismatch(self.mode_mismatch)
    }
}

fn check_mismatch(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::invalid(format!(
            "mode mismatch must lie in [0, 1], got {m}"
        )));
    }
    Ok(())
}

/// What heterodyne readout does to the state: every detected mode is mixed
/// with vacuum on a balanced splitter, so `V′ = (V + I)/2`.
///
/// Expects a physical state; the map itself is defined for any matrix.
pub fn heterodyne_channel(v: &CovarianceMatrix) -> CovarianceMatrix {
    let dim = v.dim();
    let m = (v.matrix() + DMatrix::<f64>::identity(dim, dim)) * 0.5;
    CovarianceMatrix::from_matrix(m).expect("channel preserves symmetry")
}

/// Exact inverse of [`heterodyne_channel`]: `V = 2V′ − I`. Applied to raw
/// estimates, so the input is allowed to be non-physical.
pub fn correct_added_vacuum(v_meas: &CovarianceMatrix) -> CovarianceMatrix {
    let dim = v_meas.dim();
    let m = v_meas.matrix() * 2.0 - DMatrix::<f64>::identity(dim, dim);
    CovarianceMatrix::from_matrix(m).expect("correction preserves symmetry")
}

/// Imperfect spatial overlap `m` between the two amplified modes: the cross
/// block scales by `m`, the single-mode blocks stay untouched (misalignment
/// barely changes each mode's own variance). |Det C| scales by m² exactly.
///
/// The result is flagged when it fails the physicality check; that can only
/// happen when the input was already non-physical, since shrinking
/// correlations never breaks a physical state.
pub fn apply_mode_mismatch(v2: &CovarianceMatrix, m: f64) -> Result<Flagged<CovarianceMatrix>> {
    check_mismatch(m)?;
    if v2.n_modes() != 2 {
        return Err(Error::invalid(format!(
            "mode mismatch applies to a two-mode state, got {} modes",
            v2.n_modes()
        )));
    }
    let mut out = v2.matrix().clone();
    for p in 0..2 {
        for q in 0..2 {
            out[(p, 2 + q)] *= m;
            out[(2 + q, p)] *= m;
        }
    }
    let out = CovarianceMatrix::from_matrix(out)?;
    Ok(if out.is_physical() {
        Flagged::clean(out)
    } else {
        Flagged::tripped(out)
    })
}

/// Local quadrature rotations by θ1 on mode 1 and θ2 on mode 2, the state of
/// one acquisition cycle after interferometric drift. Block determinants are
/// invariant; for symmetric-form inputs the cross block becomes
/// `c·[[cos φ, sin φ], [sin φ, −cos φ]]` with φ = θ1 + θ2.
pub fn random_phase_rotation(
    v2: &CovarianceMatrix,
    theta1: f64,
    theta2: f64,
) -> Result<CovarianceMatrix> {
    if v2.n_modes() != 2 {
        return Err(Error::invalid(format!(
            "phase rotation applies to a two-mode state, got {} modes",
            v2.n_modes()
        )));
    }
    let mut r = DMatrix::<f64>::zeros(4, 4);
    for (mode, theta) in [(0usize, theta1), (1, theta2)] {
        let (s, c) = theta.sin_cos();
        r[(2 * mode, 2 * mode)] = c;
        r[(2 * mode, 2 * mode + 1)] = -s;
        r[(2 * mode + 1, 2 * mode)] = s;
        r[(2 * mode + 1, 2 * mode + 1)] = c;
    }
    let rotated = &r * v2.matrix() * r.transpose();
    let sym = (&rotated + rotated.transpose()) * 0.5;
    CovarianceMatrix::from_matrix(sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const C_LANDMARK: f64 = 0.8660254037844386;

    fn symmetric_state(a1: f64, a2: f64, c: f64) -> CovarianceMatrix {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 0)] = a1;
        m[(1, 1)] = a1;
        m[(2, 2)] = a2;
        m[(3, 3)] = a2;
        m[(0, 2)] = c;
        m[(2, 0)] = c;
        m[(1, 3)] = -c;
        m[(3, 1)] = -c;
        CovarianceMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let v = CovarianceMatrix::vacuum(3).unwrap();
        let detected = heterodyne_channel(&v);
        assert_abs_diff_eq!((detected.matrix() - v.matrix()).amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn single_mode_arithmetic() {
        let v = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * 3.0).unwrap();
        let detected = heterodyne_channel(&v);
        assert_abs_diff_eq!(detected.matrix()[(0, 0)], 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(detected.matrix()[(1, 1)], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn two_mode_block_map() {
        let v = symmetric_state(1.5, 1.5, C_LANDMARK);
        let detected = heterodyne_channel(&v);
        assert_abs_diff_eq!(detected.matrix()[(0, 0)], 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(
            detected.matrix()[(0, 2)],
            C_LANDMARK / 2.0,
            epsilon = 1e-15
        );

        let recovered = correct_added_vacuum(&detected);
        assert_abs_diff_eq!((recovered.matrix() - v.matrix()).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn correction_inverts_channel_on_mixed_states() {
        let identity = CovarianceMatrix::vacuum(2).unwrap();
        let corrected = correct_added_vacuum(&identity);
        assert_abs_diff_eq!(
            (corrected.matrix() - identity.matrix()).amax(),
            0.0,
            epsilon = 1e-15
        );

        for (a1, a2, c) in [(1.3, 1.9, 0.4), (2.4, 2.4, 1.1), (1.0, 1.0, 0.0)] {
            let v = symmetric_state(a1, a2, c);
            let round = correct_added_vacuum(&heterodyne_channel(&v));
            assert_abs_diff_eq!((round.matrix() - v.matrix()).amax(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mismatch_scales_cross_block_only() {
        let v = symmetric_state(1.5, 1.5, C_LANDMARK);
        let unchanged = apply_mode_mismatch(&v, 1.0).unwrap();
        assert!(!unchanged.flagged);
        assert_abs_diff_eq!(
            (unchanged.value.matrix() - v.matrix()).amax(),
            0.0,
            epsilon = 1e-15
        );

        let product = apply_mode_mismatch(&v, 0.0).unwrap();
        assert_abs_diff_eq!(product.value.matrix()[(0, 2)], 0.0);
        assert_abs_diff_eq!(product.value.matrix()[(0, 0)], 1.5);

        let mismatched = apply_mode_mismatch(&v, 0.65).unwrap();
        assert!(!mismatched.flagged);
        let out = mismatched.value;
        assert_abs_diff_eq!(out.matrix()[(0, 2)], 0.5629165124598851, epsilon = 1e-12);
        assert_abs_diff_eq!(out.matrix()[(0, 0)], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            out.cross_block(0, 1).unwrap().determinant(),
            -0.316875,
            epsilon = 1e-12
        );

        assert!(apply_mode_mismatch(&v, 1.2).is_err());
        assert!(apply_mode_mismatch(&v, -0.1).is_err());
    }

    #[test]
    fn mismatch_flags_non_physical_input() {
        // a = 1, c = 0.5 has symplectic eigenvalue √(1 − 0.25) < 1: not a
        // quantum state, and still not one after shrinking c.
        let bad = symmetric_state(1.0, 1.0, 0.5);
        assert!(!bad.is_physical());
        let out = apply_mode_mismatch(&bad, 0.9).unwrap();
        assert!(out.flagged);
    }

    #[test]
    fn rotation_preserves_block_determinants() {
        let v = symmetric_state(1.5, 1.5, C_LANDMARK);
        let unchanged = random_phase_rotation(&v, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!((unchanged.matrix() - v.matrix()).amax(), 0.0, epsilon = 1e-15);

        for (t1, t2) in [(0.3, 1.1), (2.0, 4.9), (5.7, 0.4)] {
            let rotated = random_phase_rotation(&v, t1, t2).unwrap();
            assert_abs_diff_eq!(
                rotated.mode_block(0).unwrap().determinant(),
                1.5 * 1.5,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                rotated.cross_block(0, 1).unwrap().determinant(),
                -C_LANDMARK * C_LANDMARK,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn rotation_angle_sum_sets_cross_shape() {
        let v = symmetric_state(1.5, 1.5, C_LANDMARK);
        let rotated = random_phase_rotation(&v, 0.2, std::f64::consts::FRAC_PI_2 - 0.2).unwrap();
        let cross = rotated.cross_block(0, 1).unwrap();
        assert_abs_diff_eq!(cross[(0, 0)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cross[(0, 1)], C_LANDMARK, epsilon = 1e-12);
        assert_abs_diff_eq!(cross[(1, 0)], C_LANDMARK, epsilon = 1e-12);
        assert_abs_diff_eq!(cross[(1, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(DetectionConfig::default().validate().is_ok());
        let mut cfg = DetectionConfig::default();
        cfg.analysis_frequency = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = DetectionConfig::default();
        cfg.mode_mismatch = 1.5;
        assert!(cfg.validate().is_err());
    }
}

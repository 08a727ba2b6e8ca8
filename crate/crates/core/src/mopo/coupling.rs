use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the coupling-matrix structure checks (zero pattern and
/// ±pair symmetry of the spectrum), relative to the largest entry.
const STRUCTURE_RTOL: f64 = 1e-10;

/// Pairwise couplings of the four modes, in units of inverse interaction
/// time. The four values fill a symmetric 4×4 matrix with zero diagonal and
/// zero (1,4) and (2,3) entries; see [`assemble_coupling`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    pub chi12: f64,
    pub chi13: f64,
    pub chi24: f64,
    pub chi34: f64,
}

impl CouplingMatrix {
    pub fn new(chi12: f64, chi13: f64, chi24: f64, chi34: f64) -> Result<Self> {
        let chis = CouplingMatrix {
            chi12,
            chi13,
            chi24,
            chi34,
        };
        chis.validate()?;
        Ok(chis)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("chi12", self.chi12),
            ("chi13", self.chi13),
            ("chi24", self.chi24),
            ("chi34", self.chi34),
        ] {
            if !value.is_finite() {
                return Err(Error::invalid(format!("coupling {name} must be finite, got {value}")));
            }
        }
        Ok(())
    }

    /// All couplings multiplied by one scale factor, the way pump power
    /// enters the model (χ_eff = κ√I · χ_base).
    pub fn scaled(&self, factor: f64) -> Self {
        CouplingMatrix {
            chi12: factor * self.chi12,
            chi13: factor * self.chi13,
            chi24: factor * self.chi24,
            chi34: factor * self.chi34,
        }
    }

    pub fn assemble(&self) -> Matrix4<f64> {
        assemble_coupling(self)
    }
}

/// Squeeze rates and transmissions of the Bloch-Messiah picture: the four
/// couplings are equivalent to two independent squeezers with rates λ1 ≥ λ2
/// embedded between beam splitters of amplitude transmission t1, t2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochMessiahFactors {
    pub lambda1: f64,
    pub lambda2: f64,
    pub t1: f64,
    pub t2: f64,
}

impl BlochMessiahFactors {
    pub fn new(lambda1: f64, lambda2: f64, t1: f64, t2: f64) -> Result<Self> {
        let factors = BlochMessiahFactors {
            lambda1,
            lambda2,
            t1,
            t2,
        };
        factors.validate()?;
        Ok(factors)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1.is_finite() && self.lambda2.is_finite()) {
            return Err(Error::invalid("squeeze rates must be finite"));
        }
        if self.lambda2 < 0.0 || self.lambda1 < self.lambda2 {
            return Err(Error::invalid(format!(
                "squeeze rates must satisfy lambda1 >= lambda2 >= 0, got ({}, {})",
                self.lambda1, self.lambda2
            )));
        }
        for (name, t) in [("t1", self.t1), ("t2", self.t2)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!(
                    "transmission {name} must lie in [0, 1], got {t}"
                )));
            }
        }
        Ok(())
    }
}

/// Interaction time, pump intensity, and the coupling-per-√intensity
/// constant that tie a sweep axis to the dimensionless squeeze argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSetting {
    pub tau: f64,
    pub pump_intensity: f64,
    pub kappa: f64,
}

impl InteractionSetting {
    pub fn new(tau: f64, pump_intensity: f64, kappa: f64) -> Result<Self> {
        let setting = InteractionSetting {
            tau,
            pump_intensity,
            kappa,
        };
        setting.validate()?;
        Ok(setting)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !(self.pump_intensity.is_finite() && self.pump_intensity >= 0.0) {
            return Err(Error::invalid(format!(
                "pump intensity must be >= 0, got {}",
                self.pump_intensity
            )));
        }
        if !self.kappa.is_finite() {
            return Err(Error::invalid(format!(
                "kappa must be finite, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Scale factor applied to the base couplings: κ√I.
    pub fn coupling_scale(&self) -> f64 {
        self.kappa * self.pump_intensity.sqrt()
    }
}

/// Symmetric coupling matrix
/// `X = [[0, χ12, χ13, 0], [χ12, 0, 0, χ24], [χ13, 0, 0, χ34], [0, χ24, χ34, 0]]`.
/// Its eigenvalues always come in ± pairs because the nonzero entries only
/// connect {1,4} with {2,3}.
pub fn assemble_coupling(chis: &CouplingMatrix) -> Matrix4<f64> {
    let CouplingMatrix {
        chi12,
        chi13,
        chi24,
        chi34,
    } = *chis;
    Matrix4::new(
        0.0, chi12, chi13, 0.0, //
        chi12, 0.0, 0.0, chi24, //
        chi13, 0.0, 0.0, chi34, //
        0.0, chi24, chi34, 0.0,
    )
}

/// Couplings realizing a given Bloch-Messiah factor set:
/// χ12 = −t1·λ1·t2 − s1·λ2·s2, χ13 = t1·λ1·s2 − s1·λ2·t2,
/// χ24 = s1·λ1·t2 − t1·λ2·s2, χ34 = −s1·λ1·s2 − t1·λ2·t2,
/// with s_i = √(1 − t_i²).
pub fn chis_from_bloch_messiah(factors: &BlochMessiahFactors) -> Result<CouplingMatrix> {
    factors.validate()?;
    let BlochMessiahFactors {
        lambda1,
        lambda2,
        t1,
        t2,
    } = *factors;
    let s1 = (1.0 - t1 * t1).max(0.0).sqrt();
    let s2 = (1.0 - t2 * t2).max(0.0).sqrt();
    Ok(CouplingMatrix {
        chi12: -t1 * lambda1 * t2 - s1 * lambda2 * s2,
        chi13: t1 * lambda1 * s2 - s1 * lambda2 * t2,
        chi24: s1 * lambda1 * t2 - t1 * lambda2 * s2,
        chi34: -s1 * lambda1 * s2 - t1 * lambda2 * t2,
    })
}

/// Recover Bloch-Messiah factors from an assembled coupling matrix.
///
/// λ1, λ2 are the magnitudes of the two eigenvalue pairs; t1, t2 come from
/// the magnitudes of the mode-1 and mode-2 components of the λ1
/// eigenvector (the factorization fixes them up to local sign flips, so the
/// magnitudes are the invariant content). Degenerate cases follow fixed
/// conventions that keep the round trip well defined:
/// a zero matrix returns t1 = t2 = 1, and a λ1 = λ2 tie returns t1 = 1 with
/// t2 read off |χ12|/λ1.
///
/// The round trip `chis_from_bloch_messiah(bloch_messiah(X)) == X` holds for
/// every X produced by [`chis_from_bloch_messiah`]; matrices outside that
/// image (same magnitudes, incompatible signs) recover the factor magnitudes
/// only.
pub fn bloch_messiah(x: &Matrix4<f64>) -> Result<BlochMessiahFactors> {
    validate_coupling_structure(x)?;
    let eig = x.symmetric_eigen();

    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let lambda1 = eig.eigenvalues[order[0]].max(0.0);
    let lambda2 = eig.eigenvalues[order[1]].max(0.0);

    let scale = lambda1.max(1.0);
    if lambda1 <= STRUCTURE_RTOL * scale {
        return BlochMessiahFactors::new(0.0, 0.0, 1.0, 1.0);
    }
    if lambda1 - lambda2 <= 1e-8 * scale {
        // Degenerate pair: the eigenvectors mix freely inside the plane, so
        // read the single remaining angle from χ12 instead.
        let t2 = (x[(0, 1)].abs() / lambda1).clamp(0.0, 1.0);
        return BlochMessiahFactors::new(lambda1, lambda2, 1.0, t2);
    }

    let top = eig.eigenvectors.column(order[0]);
    let sqrt2 = std::f64::consts::SQRT_2;
    let t1 = (sqrt2 * top[0].abs()).clamp(0.0, 1.0);
    let t2 = (sqrt2 * top[1].abs()).clamp(0.0, 1.0);
    BlochMessiahFactors::new(lambda1, lambda2, t1, t2)
}

fn validate_coupling_structure(x: &Matrix4<f64>) -> Result<()> {
    let scale = x.amax().max(1.0);
    let tol = STRUCTURE_RTOL * scale;
    if (x - x.transpose()).amax() > tol {
        return Err(Error::invalid("coupling matrix must be symmetric"));
    }
    for (i, j) in [(0, 0), (1, 1), (2, 2), (3, 3), (0, 3), (1, 2)] {
        if x[(i, j)].abs() > tol {
            return Err(Error::invalid(format!(
                "coupling matrix entry ({}, {}) must be zero; its spectrum would lose the ± pairing",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sorted_eigenvalues(x: &Matrix4<f64>) -> [f64; 4] {
        let mut vals: Vec<f64> = x.symmetric_eigen().eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        [vals[0], vals[1], vals[2], vals[3]]
    }

    #[test]
    fn zero_couplings_assemble_to_zero() {
        let x = assemble_coupling(&CouplingMatrix::new(0.0, 0.0, 0.0, 0.0).unwrap());
        assert_eq!(x, Matrix4::zeros());
    }

    #[test]
    fn balanced_spectrum() {
        let x = assemble_coupling(&CouplingMatrix::new(0.25, 0.25, 0.25, 0.25).unwrap());
        let vals = sorted_eigenvalues(&x);
        for (got, want) in vals.into_iter().zip([0.5, 0.0, 0.0, -0.5]) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_pair_spectrum() {
        let x = assemble_coupling(&CouplingMatrix::new(-1.0, 0.0, 0.0, 0.0).unwrap());
        let vals = sorted_eigenvalues(&x);
        for (got, want) in vals.into_iter().zip([1.0, 0.0, 0.0, -1.0]) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn factor_formulas_frozen_cases() {
        let chis =
            chis_from_bloch_messiah(&BlochMessiahFactors::new(1.0, 0.0, 1.0, 1.0).unwrap())
                .unwrap();
        assert_abs_diff_eq!(chis.chi12, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi13, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi24, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi34, 0.0, epsilon = 1e-15);

        // Equal rates with balanced splitters: two independent squeezed
        // pairs (1,2) and (3,4).
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let chis =
            chis_from_bloch_messiah(&BlochMessiahFactors::new(0.7, 0.7, r, r).unwrap()).unwrap();
        assert_abs_diff_eq!(chis.chi12, -0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(chis.chi13, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chis.chi24, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(chis.chi34, -0.7, epsilon = 1e-12);

        // Fully reflective second splitter: pair (1,3) squeezed instead.
        let chis =
            chis_from_bloch_messiah(&BlochMessiahFactors::new(1.0, 0.0, 1.0, 0.0).unwrap())
                .unwrap();
        assert_abs_diff_eq!(chis.chi12, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi13, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi24, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(chis.chi34, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn transmission_out_of_range_is_rejected() {
        assert!(BlochMessiahFactors::new(1.0, 0.0, 1.2, 0.5).is_err());
        assert!(BlochMessiahFactors::new(1.0, 0.0, -0.1, 0.5).is_err());
        assert!(BlochMessiahFactors::new(0.3, 0.8, 0.5, 0.5).is_err());
    }

    #[test]
    fn balanced_matrix_recovers_canonical_factors() {
        let x = assemble_coupling(&CouplingMatrix::new(0.25, 0.25, 0.25, 0.25).unwrap());
        let f = bloch_messiah(&x).unwrap();
        assert_abs_diff_eq!(f.lambda1, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(f.lambda2, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(f.t1, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
        assert_abs_diff_eq!(f.t2, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-10);
    }

    #[test]
    fn round_trip_recovers_generic_factors() {
        let factors = BlochMessiahFactors::new(0.8, 0.3, 0.9, 0.6).unwrap();
        let x = assemble_coupling(&chis_from_bloch_messiah(&factors).unwrap());
        let recovered = bloch_messiah(&x).unwrap();
        assert_abs_diff_eq!(recovered.lambda1, factors.lambda1, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.lambda2, factors.lambda2, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.t1, factors.t1, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.t2, factors.t2, epsilon = 1e-10);

        let back = assemble_coupling(&chis_from_bloch_messiah(&recovered).unwrap());
        assert_abs_diff_eq!((back - x).amax(), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_matrix_uses_canonical_convention() {
        let f = bloch_messiah(&Matrix4::zeros()).unwrap();
        assert_eq!((f.lambda1, f.lambda2, f.t1, f.t2), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn degenerate_rates_round_trip() {
        let factors = BlochMessiahFactors::new(0.7, 0.7, 1.0, 0.4).unwrap();
        let x = assemble_coupling(&chis_from_bloch_messiah(&factors).unwrap());
        let recovered = bloch_messiah(&x).unwrap();
        assert_abs_diff_eq!(recovered.lambda1, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.lambda2, 0.7, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.t1, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(recovered.t2, 0.4, epsilon = 1e-10);
    }

    #[test]
    fn structure_violations_are_rejected() {
        let mut x = Matrix4::zeros();
        x[(0, 0)] = 0.5;
        assert!(bloch_messiah(&x).is_err());

        let mut x = Matrix4::zeros();
        x[(0, 3)] = 0.5;
        x[(3, 0)] = 0.5;
        assert!(bloch_messiah(&x).is_err());

        let mut x = Matrix4::zeros();
        x[(0, 1)] = 0.5;
        assert!(bloch_messiah(&x).is_err(), "asymmetric input must be rejected");
    }

    #[test]
    fn coupling_scale_is_kappa_root_intensity() {
        let setting = InteractionSetting::new(1.0, 1.44, 0.75).unwrap();
        assert_abs_diff_eq!(setting.coupling_scale(), 0.9, epsilon = 1e-12);
        assert!(InteractionSetting::new(-1.0, 1.0, 0.75).is_err());
        assert!(InteractionSetting::new(1.0, -0.5, 0.75).is_err());
    }
}

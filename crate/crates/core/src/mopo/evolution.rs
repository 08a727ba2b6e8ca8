use nalgebra::Matrix4;

use crate::error::{Error, Result};
use crate::gaussian::{CovarianceMatrix, SymplecticTransform};
use crate::Flagged;

use super::coupling::CouplingMatrix;

/// Relative p/q variance asymmetry above which [`average_gain`] flags its
/// result instead of trusting the symmetric-form assumption.
const GAIN_ASYMMETRY_TOL: f64 = 0.05;

/// Heisenberg evolution of the four modes for interaction time `tau`:
/// p quadratures map by `exp(Xτ)`, q quadratures by `exp(−Xτ)`.
///
/// The exponentials come from the spectral decomposition of the symmetric
/// coupling matrix, which is exact for this family and keeps the p and q
/// sectors exact inverses of each other, so the result is symplectic by
/// construction.
pub fn evolution_symplectic(chis: &CouplingMatrix, tau: f64) -> SymplecticTransform {
    let x = chis.assemble();
    let eig = x.symmetric_eigen();
    let mut plus = Matrix4::zeros();
    let mut minus = Matrix4::zeros();
    for k in 0..4 {
        let grow = (eig.eigenvalues[k] * tau).exp();
        let col = eig.eigenvectors.column(k);
        for i in 0..4 {
            for j in 0..4 {
                let outer = col[i] * col[j];
                plus[(i, j)] += grow * outer;
                minus[(i, j)] += outer / grow;
            }
        }
    }
    let mut s = nalgebra::DMatrix::zeros(8, 8);
    for i in 0..4 {
        for j in 0..4 {
            s[(2 * i, 2 * j)] = plus[(i, j)];
            s[(2 * i + 1, 2 * j + 1)] = minus[(i, j)];
        }
    }
    SymplecticTransform::from_matrix_unchecked(s)
}

/// Four-mode state produced by amplifying vacuum: the p block of the
/// covariance matrix is `exp(2Xτ)` and the q block `exp(−2Xτ)`.
pub fn output_covariance(chis: &CouplingMatrix, tau: f64) -> CovarianceMatrix {
    let s = evolution_symplectic(chis, tau);
    let vacuum = CovarianceMatrix::vacuum(4).expect("four-mode vacuum");
    s.apply_to(&vacuum).expect("evolution preserves dimensions")
}

/// Analytic single-pair reduction for the fully balanced device (all
/// couplings of magnitude `chi`): with `s = 4χτ` the reduced two-mode state
/// of modes (1,2) has diagonal variance `a = (cosh s + 1)/2` and
/// quadrature correlation `c = sinh(s)/2` (+c on p-p, −c on q-q), which
/// satisfy `c² = a² − a` identically.
pub fn balanced_closed_form(chi: f64, tau: f64) -> (f64, f64) {
    let s = 4.0 * chi * tau;
    ((s.cosh() + 1.0) / 2.0, s.sinh() / 2.0)
}

/// Mean of the two single-mode variances of a two-mode state in symmetric
/// form. The gain of the amplifier is this number; the flag trips when the
/// p and q variances of either mode disagree by more than 5%, meaning the
/// symmetric-form assumption does not hold.
pub fn average_gain(v2: &CovarianceMatrix) -> Result<Flagged<f64>> {
    if v2.n_modes() != 2 {
        return Err(Error::invalid(format!(
            "average_gain needs a two-mode state, got {} modes",
            v2.n_modes()
        )));
    }
    let m = v2.matrix();
    let mut total = 0.0;
    let mut symmetric = true;
    for mode in 0..2 {
        let pp = m[(2 * mode, 2 * mode)];
        let qq = m[(2 * mode + 1, 2 * mode + 1)];
        let mean = (pp + qq) / 2.0;
        total += mean;
        if (pp - qq).abs() > GAIN_ASYMMETRY_TOL * mean.abs().max(f64::MIN_POSITIVE) {
            symmetric = false;
        }
    }
    let gain = total / 2.0;
    Ok(if symmetric {
        Flagged::clean(gain)
    } else {
        Flagged::tripped(gain)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{symplectic_generator, GeneratorKind};
    use crate::mopo::coupling::BlochMessiahFactors;
    use crate::mopo::chis_from_bloch_messiah;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    const COSH_HALF_DIAG: f64 = 1.0638129826031904;
    const A_AT_S1: f64 = 1.2715403174076219;
    const C_AT_S1: f64 = 0.5876005968219007;

    fn balanced(chi: f64) -> CouplingMatrix {
        CouplingMatrix::new(chi, chi, chi, chi).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let s = evolution_symplectic(&balanced(0.4), 0.0);
        assert_abs_diff_eq!(
            (s.matrix() - DMatrix::<f64>::identity(8, 8)).amax(),
            0.0,
            epsilon = 1e-14
        );
        let v = output_covariance(&balanced(0.4), 0.0);
        assert_abs_diff_eq!(
            (v.matrix() - DMatrix::<f64>::identity(8, 8)).amax(),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn balanced_evolution_diagonal() {
        // Balanced couplings 0.25 at τ = 1: the symplectic p block is
        // exp(X) with spectrum ±1/2, so its diagonal is (cosh ½ + 1)/2;
        // the covariance p block is exp(2X) with diagonal (cosh 1 + 1)/2.
        let s = evolution_symplectic(&balanced(0.25), 1.0);
        for mode in 0..4 {
            assert_abs_diff_eq!(
                s.matrix()[(2 * mode, 2 * mode)],
                COSH_HALF_DIAG,
                epsilon = 1e-12
            );
        }
        assert!(s.symplectic_defect() < 1e-12);

        let v = output_covariance(&balanced(0.25), 1.0);
        for mode in 0..4 {
            assert_abs_diff_eq!(v.matrix()[(2 * mode, 2 * mode)], A_AT_S1, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_coupling_is_a_two_mode_squeezer() {
        let chis = CouplingMatrix::new(-1.0, 0.0, 0.0, 0.0).unwrap();
        let s = evolution_symplectic(&chis, 0.5);
        let expected = symplectic_generator(
            GeneratorKind::TwoModeSqueezer {
                i: 0,
                j: 1,
                r: 0.5,
                quadrature_angle: std::f64::consts::PI,
            },
            4,
        )
        .unwrap();
        assert_abs_diff_eq!((s.matrix() - expected.matrix()).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn balanced_output_matches_closed_form() {
        let v = output_covariance(&balanced(0.25), 1.0);
        let reduced = v.reduce_to_modes(&[0, 1]).unwrap();
        let (a, c) = balanced_closed_form(0.25, 1.0);
        assert_abs_diff_eq!(a, A_AT_S1, epsilon = 1e-12);
        assert_abs_diff_eq!(c, C_AT_S1, epsilon = 1e-12);
        let m = reduced.matrix();
        for mode in 0..2 {
            assert_abs_diff_eq!(m[(2 * mode, 2 * mode)], a, epsilon = 1e-10);
            assert_abs_diff_eq!(m[(2 * mode + 1, 2 * mode + 1)], a, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(m[(0, 2)], c, epsilon = 1e-10);
        assert_abs_diff_eq!(m[(1, 3)], -c, epsilon = 1e-10);
        assert_abs_diff_eq!(m[(0, 3)], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(m[(1, 2)], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn closed_form_identity_and_endpoints() {
        let (a, c) = balanced_closed_form(0.3, 0.0);
        assert_eq!((a, c), (1.0, 0.0));
        // cosh s = 2 gives the landmark (a, c) = (3/2, √3/2).
        let s = 2.0_f64.acosh();
        let (a, c) = balanced_closed_form(s / 4.0, 1.0);
        assert_abs_diff_eq!(a, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 0.8660254037844386, epsilon = 1e-12);
        for k in 0..=12 {
            let s = 0.25 * k as f64;
            let (a, c) = balanced_closed_form(s / 4.0, 1.0);
            assert_abs_diff_eq!(c * c, a * a - a, epsilon = 1e-10 * a.max(1.0).powi(2));
        }
    }

    #[test]
    fn photon_number_balance() {
        for (chis, tau) in [
            (CouplingMatrix::new(0.3, -0.7, 0.45, 0.2).unwrap(), 0.7),
            (CouplingMatrix::new(1.1, 0.6, -0.25, 0.9).unwrap(), 1.3),
            (
                chis_from_bloch_messiah(&BlochMessiahFactors::new(0.9, 0.4, 0.8, 0.3).unwrap())
                    .unwrap(),
                1.0,
            ),
        ] {
            let v = output_covariance(&chis, tau);
            let upper = v.mean_photon_number(0).unwrap() + v.mean_photon_number(3).unwrap();
            let lower = v.mean_photon_number(1).unwrap() + v.mean_photon_number(2).unwrap();
            assert_abs_diff_eq!(upper, lower, epsilon = 1e-10 * upper.max(1.0));
            assert!(v.is_physical());
            // Symmetric spectrum forces equal p and q variances per mode.
            for mode in 0..4 {
                assert_abs_diff_eq!(
                    v.matrix()[(2 * mode, 2 * mode)],
                    v.matrix()[(2 * mode + 1, 2 * mode + 1)],
                    epsilon = 1e-10
                );
            }
        }
    }

    #[test]
    fn average_gain_values_and_flag() {
        let vacuum = CovarianceMatrix::vacuum(2).unwrap();
        let g = average_gain(&vacuum).unwrap();
        assert!(!g.flagged);
        assert_abs_diff_eq!(g.value, 1.0);

        let m = DMatrix::from_diagonal(&nalgebra::dvector![1.4, 1.4, 1.6, 1.6]);
        let g = average_gain(&CovarianceMatrix::from_matrix(m).unwrap()).unwrap();
        assert!(!g.flagged);
        assert_abs_diff_eq!(g.value, 1.5, epsilon = 1e-12);

        let reduced = output_covariance(&balanced(0.25), 1.0)
            .reduce_to_modes(&[0, 1])
            .unwrap();
        let g = average_gain(&reduced).unwrap();
        assert!(!g.flagged);
        assert_abs_diff_eq!(g.value, A_AT_S1, epsilon = 1e-10);

        let m = DMatrix::from_diagonal(&nalgebra::dvector![1.4, 1.0, 1.4, 1.4]);
        let g = average_gain(&CovarianceMatrix::from_matrix(m).unwrap()).unwrap();
        assert!(g.flagged);
        assert_abs_diff_eq!(g.value, 1.3, epsilon = 1e-12);

        assert!(average_gain(&CovarianceMatrix::vacuum(4).unwrap()).is_err());
    }
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};

use super::covariance::{CovarianceMatrix, SymplecticForm};

/// Absolute entrywise tolerance on ‖SΩSᵀ − Ω‖∞ for a matrix to count as
/// symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// Elementary Gaussian unitaries in their quadrature representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    /// 2×2 rotation by `theta` on one mode's (p, q) plane.
    Rotation { mode: usize, theta: f64 },
    /// Amplitude mixing of two modes with transmission `t` (and √(1−t²)
    /// into the other arm).
    BeamSplitter { i: usize, j: usize, transmission: f64 },
    /// Two-mode squeezer with parameter `r`; at `quadrature_angle = 0` the
    /// joint p-quadratures couple with cosh r / sinh r and the q-quadratures
    /// with cosh r / −sinh r.
    TwoModeSqueezer {
        i: usize,
        j: usize,
        r: f64,
        quadrature_angle: f64,
    },
}

/// Linear quadrature map preserving the canonical commutation form,
/// `S Ω Sᵀ = Ω` (checked to [`SYMPLECTIC_TOL`] on every construction path
/// that could violate it).
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    m: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("identity transform needs n_modes >= 1"));
        }
        Ok(SymplecticTransform {
            n_modes,
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Wraps an explicit matrix after verifying the symplectic condition.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "symplectic transform must be 2Nx2N, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let t = SymplecticTransform {
            n_modes: m.nrows() / 2,
            m,
        };
        let defect = t.symplectic_defect();
        if defect > SYMPLECTIC_TOL {
            return Err(Error::invalid(format!(
                "matrix is not symplectic: ‖SΩSᵀ − Ω‖∞ = {defect:.3e}"
            )));
        }
        Ok(t)
    }

    /// For constructions that are symplectic by algebra (spectral
    /// exponentials); skips the defect check so large squeeze arguments
    /// cannot trip the absolute tolerance on well-formed input.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows() % 2 == 0);
        SymplecticTransform {
            n_modes: m.nrows() / 2,
            m,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// ‖SΩSᵀ − Ω‖∞, the entrywise violation of the symplectic condition.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = SymplecticForm::new(self.n_modes);
        let resid = &self.m * omega.matrix() * self.m.transpose() - omega.matrix();
        resid.iter().fold(0.0_f64, |mx, x| mx.max(x.abs()))
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticTransform) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose transforms on {} and {} modes",
                self.n_modes, other.n_modes
            )));
        }
        Ok(SymplecticTransform {
            n_modes: self.n_modes,
            m: &self.m * &other.m,
        })
    }

    /// Covariance image `S V Sᵀ`, symmetrized to kill roundoff asymmetry.
    pub fn apply_to(&self, v: &CovarianceMatrix) -> Result<CovarianceMatrix> {
        if self.n_modes != v.n_modes() {
            return Err(Error::DimensionMismatch(format!(
                "transform on {} modes applied to state on {} modes",
                self.n_modes,
                v.n_modes()
            )));
        }
        let image = &self.m * v.matrix() * self.m.transpose();
        let sym = (&image + image.transpose()) * 0.5;
        CovarianceMatrix::from_matrix(sym)
    }
}

/// Builds the symplectic matrix of one elementary Gaussian unitary.
pub fn symplectic_generator(kind: GeneratorKind, n_modes: usize) -> Result<SymplecticTransform> {
    if n_modes == 0 {
        return Err(Error::invalid("symplectic_generator needs n_modes >= 1"));
    }
    let dim = 2 * n_modes;
    let mut m = DMatrix::identity(dim, dim);
    match kind {
        GeneratorKind::Rotation { mode, theta } => {
            check_mode(mode, n_modes)?;
            let (c, s) = (theta.cos(), theta.sin());
            let r = 2 * mode;
            m[(r, r)] = c;
            m[(r, r + 1)] = -s;
            m[(r + 1, r)] = s;
            m[(r + 1, r + 1)] = c;
        }
        GeneratorKind::BeamSplitter { i, j, transmission } => {
            check_pair(i, j, n_modes)?;
            if !(0.0..=1.0).contains(&transmission) {
                return Err(Error::invalid(format!(
                    "beamsplitter transmission {transmission} outside [0, 1]"
                )));
            }
            let t = transmission;
            let s = (1.0 - t * t).sqrt();
            let (a, b) = (2 * i, 2 * j);
            for d in 0..2 {
                m[(a + d, a + d)] = t;
                m[(a + d, b + d)] = s;
                m[(b + d, a + d)] = -s;
                m[(b + d, b + d)] = t;
            }
        }
        GeneratorKind::TwoModeSqueezer {
            i,
            j,
            r,
            quadrature_angle,
        } => {
            check_pair(i, j, n_modes)?;
            // Exponential of the quadrature generator: with the 2×2 block
            // B(φ) = [[cos φ, sin φ], [sin φ, −cos φ]] satisfying B² = I,
            // exp(r·[[0, B], [B, 0]]) = cosh r · I + sinh r · [[0, B], [B, 0]].
            let (ch, sh) = (r.cosh(), r.sinh());
            let (c, s) = (quadrature_angle.cos(), quadrature_angle.sin());
            let (a, b) = (2 * i, 2 * j);
            for d in 0..2 {
                m[(a + d, a + d)] = ch;
                m[(b + d, b + d)] = ch;
            }
            for (row, col) in [(a, b), (b, a)] {
                m[(row, col)] = sh * c;
                m[(row, col + 1)] = sh * s;
                m[(row + 1, col)] = sh * s;
                m[(row + 1, col + 1)] = -sh * c;
            }
        }
    }
    SymplecticTransform::from_matrix(m)
}

fn check_mode(mode: usize, n_modes: usize) -> Result<()> {
    if mode >= n_modes {
        return Err(Error::invalid(format!(
            "mode index {mode} out of range for {n_modes} modes"
        )));
    }
    Ok(())
}

fn check_pair(i: usize, j: usize, n_modes: usize) -> Result<()> {
    check_mode(i, n_modes)?;
    check_mode(j, n_modes)?;
    if i == j {
        return Err(Error::invalid(format!(
            "two-mode generator needs distinct modes, got i = j = {i}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vac(n: usize) -> CovarianceMatrix {
        CovarianceMatrix::vacuum(n).unwrap()
    }

    #[test]
    fn rotation_zero_is_identity() {
        let s = symplectic_generator(GeneratorKind::Rotation { mode: 0, theta: 0.0 }, 2).unwrap();
        assert_eq!(s.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn full_transmission_beamsplitter_is_identity() {
        let s = symplectic_generator(
            GeneratorKind::BeamSplitter {
                i: 0,
                j: 1,
                transmission: 1.0,
            },
            2,
        )
        .unwrap();
        assert_eq!(s.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn two_mode_squeezer_on_vacuum_frozen_values() {
        // r = 0.5: per-mode variance cosh(1) = 1.5430806348152437,
        // p-p correlation sinh(1) = 1.1752011936438014.
        let s = symplectic_generator(
            GeneratorKind::TwoModeSqueezer {
                i: 0,
                j: 1,
                r: 0.5,
                quadrature_angle: 0.0,
            },
            2,
        )
        .unwrap();
        let v = s.apply_to(&vac(2)).unwrap();
        assert_abs_diff_eq!(v.matrix()[(0, 0)], 1.5430806348152437, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(1, 1)], 1.5430806348152437, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(2, 2)], 1.5430806348152437, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(0, 2)], 1.1752011936438014, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(1, 3)], -1.1752011936438014, epsilon = 1e-12);
        assert_abs_diff_eq!(v.matrix()[(0, 1)], 0.0, epsilon = 1e-12);
        assert!(v.is_physical());
    }

    #[test]
    fn tms_partial_trace_is_thermal() {
        let s = symplectic_generator(
            GeneratorKind::TwoModeSqueezer {
                i: 0,
                j: 1,
                r: 0.5,
                quadrature_angle: 0.0,
            },
            2,
        )
        .unwrap();
        let v = s.apply_to(&vac(2)).unwrap();
        let single = v.reduce_to_modes(&[0]).unwrap();
        assert_abs_diff_eq!(single.matrix()[(0, 0)], 1.0_f64.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(single.matrix()[(1, 1)], 1.0_f64.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(single.matrix()[(0, 1)], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn generators_are_symplectic_and_compose() {
        let r = symplectic_generator(GeneratorKind::Rotation { mode: 1, theta: 0.7 }, 3).unwrap();
        let b = symplectic_generator(
            GeneratorKind::BeamSplitter {
                i: 0,
                j: 2,
                transmission: 0.6,
            },
            3,
        )
        .unwrap();
        let z = symplectic_generator(
            GeneratorKind::TwoModeSqueezer {
                i: 1,
                j: 2,
                r: 0.9,
                quadrature_angle: 1.3,
            },
            3,
        )
        .unwrap();
        let all = r.compose(&b).unwrap().compose(&z).unwrap();
        assert!(all.symplectic_defect() < SYMPLECTIC_TOL);
    }

    #[test]
    fn rotation_on_vacuum_is_vacuum() {
        let s = symplectic_generator(GeneratorKind::Rotation { mode: 0, theta: 1.1 }, 1).unwrap();
        let v = s.apply_to(&vac(1)).unwrap();
        assert_abs_diff_eq!(v.matrix(), &DMatrix::<f64>::identity(2, 2), epsilon = 1e-15);
    }

    #[test]
    fn invalid_generator_arguments() {
        assert!(symplectic_generator(GeneratorKind::Rotation { mode: 2, theta: 0.0 }, 2).is_err());
        assert!(symplectic_generator(
            GeneratorKind::BeamSplitter {
                i: 1,
                j: 1,
                transmission: 0.5
            },
            2
        )
        .is_err());
        assert!(symplectic_generator(
            GeneratorKind::BeamSplitter {
                i: 0,
                j: 1,
                transmission: 1.5
            },
            2
        )
        .is_err());
    }

    #[test]
    fn apply_dimension_mismatch() {
        let s = symplectic_generator(GeneratorKind::Rotation { mode: 0, theta: 0.3 }, 1).unwrap();
        assert!(s.apply_to(&vac(2)).is_err());
    }

    #[test]
    fn from_matrix_rejects_non_symplectic() {
        let m = DMatrix::<f64>::identity(4, 4) * 2.0;
        assert!(SymplecticTransform::from_matrix(m).is_err());
    }
}

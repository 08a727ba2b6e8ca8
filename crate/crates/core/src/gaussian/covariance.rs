use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Lower bound on the minimum eigenvalue of V + iΩ for a matrix to count as
/// physical: the roundoff floor for 8×8 double-precision exponentials.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// Relative tolerance for the symmetry check on construction.
const SYMMETRY_RTOL: f64 = 1e-12;

/// The symplectic form Ω: block-diagonal 2×2 blocks [[0, 1], [-1, 0]] in the
/// interleaved quadrature ordering. Satisfies Ω² = −I and Ωᵀ = −Ω.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    n_modes: usize,
    m: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let dim = 2 * n_modes;
        let mut m = DMatrix::zeros(dim, dim);
        for k in 0..n_modes {
            m[(2 * k, 2 * k + 1)] = 1.0;
            m[(2 * k + 1, 2 * k)] = -1.0;
        }
        SymplecticForm { n_modes, m }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

/// Real symmetric 2N×2N matrix of quadrature second moments in the
/// interleaved `(p1, q1, p2, q2, ...)` ordering, vacuum-normalized so the
/// vacuum state is exactly the identity.
///
/// Non-physical matrices are representable on purpose: raw noisy estimates
/// can transiently violate `V + iΩ ≥ 0`, and the witness functions accept
/// them and report rather than refuse.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// The N-mode vacuum state: the 2N×2N identity.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid("vacuum_state: n_modes must be at least 1"));
        }
        Ok(CovarianceMatrix {
            n_modes,
            m: DMatrix::identity(2 * n_modes, 2 * n_modes),
        })
    }

    /// Wraps an explicit matrix, checking shape and symmetry (relative
    /// tolerance 1e-12); the stored matrix is exactly symmetrized.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "covariance matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 || m.nrows() % 2 != 0 {
            return Err(Error::invalid(format!(
                "covariance matrix must be 2Nx2N with N >= 1, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().fold(1.0_f64, |s, x| s.max(x.abs()));
        for i in 0..m.nrows() {
            for j in (i + 1)..m.ncols() {
                if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_RTOL * scale {
                    return Err(Error::invalid(format!(
                        "covariance matrix asymmetric at ({i},{j}): {} vs {}",
                        m[(i, j)],
                        m[(j, i)]
                    )));
                }
            }
        }
        let n_modes = m.nrows() / 2;
        let sym = (&m + m.transpose()) * 0.5;
        Ok(CovarianceMatrix { n_modes, m: sym })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// The 2×2 single-mode block (p, q covariances of one mode).
    pub fn mode_block(&self, mode: usize) -> Result<Matrix2<f64>> {
        self.check_mode(mode)?;
        let r = 2 * mode;
        Ok(Matrix2::new(
            self.m[(r, r)],
            self.m[(r, r + 1)],
            self.m[(r + 1, r)],
            self.m[(r + 1, r + 1)],
        ))
    }

    /// The 2×2 cross block between two modes (rows from `i`, columns from `j`).
    pub fn cross_block(&self, i: usize, j: usize) -> Result<Matrix2<f64>> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        let (r, c) = (2 * i, 2 * j);
        Ok(Matrix2::new(
            self.m[(r, c)],
            self.m[(r, c + 1)],
            self.m[(r + 1, c)],
            self.m[(r + 1, c + 1)],
        ))
    }

    /// Gaussian partial trace: the sub-matrix for the selected modes'
    /// quadrature pairs, in the order given (so `[1, 0]` swaps the roles of
    /// the two subsystems coherently).
    pub fn reduce_to_modes(&self, modes: &[usize]) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("reduce_to_modes: empty mode list"));
        }
        for (k, &mode) in modes.iter().enumerate() {
            self.check_mode(mode)?;
            if modes[..k].contains(&mode) {
                return Err(Error::invalid(format!(
                    "reduce_to_modes: duplicate mode index {mode}"
                )));
            }
        }
        let dim = 2 * modes.len();
        let mut out = DMatrix::zeros(dim, dim);
        for (a, &i) in modes.iter().enumerate() {
            for (b, &j) in modes.iter().enumerate() {
                for da in 0..2 {
                    for db in 0..2 {
                        out[(2 * a + da, 2 * b + db)] = self.m[(2 * i + da, 2 * j + db)];
                    }
                }
            }
        }
        Ok(CovarianceMatrix {
            n_modes: modes.len(),
            m: out,
        })
    }

    /// Minimum eigenvalue of the Hermitian matrix V + iΩ. Non-negative (up
    /// to roundoff) exactly when the matrix describes a quantum state.
    pub fn min_physicality_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let omega = SymplecticForm::new(self.n_modes);
        let mut h = DMatrix::<Complex<f64>>::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                h[(i, j)] = Complex::new(self.m[(i, j)], omega.matrix()[(i, j)]);
            }
        }
        let eigs = h.symmetric_eigen().eigenvalues;
        eigs.iter().fold(f64::INFINITY, |lo, &e| lo.min(e))
    }

    /// Whether `V + iΩ ≥ 0` holds within [`PHYSICALITY_TOL`].
    pub fn is_physical(&self) -> bool {
        self.min_physicality_eigenvalue() >= -PHYSICALITY_TOL
    }

    /// Mean photon number of one mode, `(V_pp + V_qq − 2) / 4` in the
    /// vacuum-variance-1 convention.
    pub fn mean_photon_number(&self, mode: usize) -> Result<f64> {
        self.check_mode(mode)?;
        let r = 2 * mode;
        Ok((self.m[(r, r)] + self.m[(r + 1, r + 1)] - 2.0) / 4.0)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes {
            return Err(Error::invalid(format!(
                "mode index {mode} out of range for {} modes",
                self.n_modes
            )));
        }
        Ok(())
    }
}

/// Serialized as `{ n_modes, rows }` with row-major nested arrays.
#[derive(Serialize, Deserialize)]
struct CovarianceRepr {
    n_modes: usize,
    rows: Vec<Vec<f64>>,
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows = (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect();
        CovarianceRepr {
            n_modes: self.n_modes,
            rows,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CovarianceMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CovarianceRepr::deserialize(deserializer)?;
        let dim = 2 * repr.n_modes;
        if repr.rows.len() != dim || repr.rows.iter().any(|r| r.len() != dim) {
            return Err(D::Error::custom(format!(
                "covariance rows must form a {dim}x{dim} matrix"
            )));
        }
        let m = DMatrix::from_fn(dim, dim, |i, j| repr.rows[i][j]);
        CovarianceMatrix::from_matrix(m).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_is_identity() {
        for n in [1, 2, 4] {
            let v = CovarianceMatrix::vacuum(n).unwrap();
            assert_eq!(v.matrix(), &DMatrix::<f64>::identity(2 * n, 2 * n));
            assert!(v.is_physical());
        }
    }

    #[test]
    fn vacuum_zero_modes_rejected() {
        assert!(CovarianceMatrix::vacuum(0).is_err());
    }

    #[test]
    fn omega_squares_to_minus_identity() {
        let omega = SymplecticForm::new(3);
        let sq = omega.matrix() * omega.matrix();
        assert_abs_diff_eq!(sq, -DMatrix::<f64>::identity(6, 6), epsilon = 0.0);
        assert_abs_diff_eq!(
            omega.matrix().transpose(),
            -omega.matrix(),
            epsilon = 0.0
        );
    }

    #[test]
    fn from_matrix_rejects_asymmetry_and_odd_dims() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 1)] = 0.5;
        assert!(CovarianceMatrix::from_matrix(m).is_err());
        assert!(CovarianceMatrix::from_matrix(DMatrix::zeros(3, 3)).is_err());
        assert!(CovarianceMatrix::from_matrix(DMatrix::zeros(2, 4)).is_err());
    }

    #[test]
    fn vacuum_physicality_eigenvalue_is_zero() {
        // V + iΩ for vacuum has eigenvalues {0, 2}, each N-fold.
        let v = CovarianceMatrix::vacuum(2).unwrap();
        assert_abs_diff_eq!(v.min_physicality_eigenvalue(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn thermal_noise_added_stays_physical_squeezed_below_vacuum_is_not() {
        let hot = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * 3.0).unwrap();
        assert!(hot.is_physical());
        // diag(0.5, 0.5) violates the uncertainty relation.
        let squashed = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * 0.5).unwrap();
        assert!(!squashed.is_physical());
    }

    #[test]
    fn reduce_vacuum_picks_identity() {
        let v = CovarianceMatrix::vacuum(4).unwrap();
        let r = v.reduce_to_modes(&[0, 1]).unwrap();
        assert_eq!(r.n_modes(), 2);
        assert_eq!(r.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn reduce_order_swaps_blocks() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 0)] = 1.4;
        m[(1, 1)] = 1.4;
        m[(2, 2)] = 1.9;
        m[(3, 3)] = 1.9;
        m[(0, 2)] = 0.3;
        m[(2, 0)] = 0.3;
        let v = CovarianceMatrix::from_matrix(m).unwrap();
        let swapped = v.reduce_to_modes(&[1, 0]).unwrap();
        assert_abs_diff_eq!(swapped.matrix()[(0, 0)], 1.9);
        assert_abs_diff_eq!(swapped.matrix()[(2, 2)], 1.4);
        assert_abs_diff_eq!(swapped.matrix()[(0, 2)], 0.3);
    }

    #[test]
    fn reduce_rejects_bad_indices() {
        let v = CovarianceMatrix::vacuum(2).unwrap();
        assert!(v.reduce_to_modes(&[0, 0]).is_err());
        assert!(v.reduce_to_modes(&[2]).is_err());
        assert!(v.reduce_to_modes(&[]).is_err());
    }

    #[test]
    fn photon_number_vacuum_and_formula() {
        let v = CovarianceMatrix::vacuum(2).unwrap();
        assert_abs_diff_eq!(v.mean_photon_number(0).unwrap(), 0.0);
        let warm = CovarianceMatrix::from_matrix(DMatrix::identity(2, 2) * 1.5).unwrap();
        assert_abs_diff_eq!(warm.mean_photon_number(0).unwrap(), 0.25);
        assert!(warm.mean_photon_number(1).is_err());
    }

    #[test]
    fn serde_round_trip() {
        let mut m = DMatrix::<f64>::identity(4, 4);
        m[(0, 2)] = 0.25;
        m[(2, 0)] = 0.25;
        let v = CovarianceMatrix::from_matrix(m).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        let back: CovarianceMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(v, back);
    }
}

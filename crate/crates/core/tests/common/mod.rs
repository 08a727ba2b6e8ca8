//! Independent numeric oracles for the integration suites: a series-based
//! matrix exponential and a symplectic spectrum computed straight from the
//! eigenvalues of ΩV. Both avoid the code paths they are used to check.

use mopo_sim::gaussian::{CovarianceMatrix, SymplecticForm};
use mopo_sim::nalgebra::DMatrix;

/// exp(M) by scaling-and-squaring with a plain Taylor series. Accuracy is
/// far below 1e-12 for the matrix norms exercised here; the point is that it
/// shares nothing with the spectral-decomposition implementation.
pub fn expm_series(m: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = m.nrows();
    assert_eq!(dim, m.ncols());
    let norm = m.iter().fold(0.0_f64, |mx, x| mx.max(x.abs())) * dim as f64;
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let scaled = m / 2.0_f64.powi(squarings);
    let mut sum = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for j in 1..=32 {
        term = (&term * &scaled) / j as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Symplectic eigenvalues of a covariance matrix: the positive imaginary
/// parts of the spectrum of ΩV, sorted ascending.
pub fn symplectic_spectrum(v: &CovarianceMatrix) -> Vec<f64> {
    spectrum_of(v.matrix(), v.n_modes())
}

/// Symplectic eigenvalues of the partial transpose (q-sign flip on the last
/// mode) of a two-mode covariance matrix.
pub fn pt_symplectic_spectrum(v: &CovarianceMatrix) -> Vec<f64> {
    assert_eq!(v.n_modes(), 2);
    let mut m = v.matrix().clone();
    for k in 0..4 {
        m[(3, k)] = -m[(3, k)];
    }
    for k in 0..4 {
        m[(k, 3)] = -m[(k, 3)];
    }
    spectrum_of(&m, 2)
}

fn spectrum_of(m: &DMatrix<f64>, n_modes: usize) -> Vec<f64> {
    let omega = SymplecticForm::new(n_modes);
    let prod = omega.matrix() * m;
    let mut nus: Vec<f64> = prod
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| z.im)
        .collect();
    nus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(nus.len(), n_modes, "spectrum of ΩV must pair up as ±iν");
    nus
}

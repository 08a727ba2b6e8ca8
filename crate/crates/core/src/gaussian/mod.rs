//! Symplectic linear algebra over quadrature covariance matrices.
//!
//! Conventions, fixed once for the whole crate:
//!
//! * quadrature ordering is interleaved, `(p1, q1, p2, q2, ...)`;
//! * vacuum variance is 1 per quadrature, so the vacuum state is the
//!   identity matrix and physicality reads `V + iΩ ≥ 0` with Ω built from
//!   2×2 blocks `[[0, 1], [-1, 0]]`.

mod covariance;
mod symplectic;
mod witness;

pub use covariance::{CovarianceMatrix, SymplecticForm, PHYSICALITY_TOL};
pub use symplectic::{symplectic_generator, GeneratorKind, SymplecticTransform, SYMPLECTIC_TOL};
pub use witness::{
    det_v_symmetric, ppt_symplectic_eigenvalue, purity, witness_pair, witnesses_from_invariants,
    WitnessReport,
};

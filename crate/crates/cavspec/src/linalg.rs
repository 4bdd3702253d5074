//! Dense symmetric eigensolver shared by every exact-diagonalization path.
//!
//! nalgebra's implicit-QL iteration can return an orthogonal basis whose
//! columns are not eigenvectors (‖Hv − λv‖ up to ~0.5 for manifold
//! Hamiltonians at particular Fock truncations, e.g. N = 1, η ≈ 0.49,
//! d ∈ {16, 20..23}), so dense solves go through faer instead.

use faer::{Mat, Side};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Eigendecomposition of a real symmetric matrix. `values[j]` pairs with
/// column `j` of `vectors`; values are sorted ascending.
pub struct SymEig {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn sym_eig(h: &DMatrix<f64>) -> Result<SymEig> {
    let n = h.nrows();
    let a = Mat::from_fn(n, n, |i, j| h[(i, j)]);
    let eig = a.self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenConvergence { dim: n })?;
    let u = eig.U();
    let values: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    Ok(SymEig { values, vectors })
}

//! Applications built on the distributed multiply.

mod bc;
mod galerkin;
mod mis2;

pub use bc::{bc_approx, bc_batch, bc_sources, BcScores};
pub use galerkin::{galerkin, outer_product_1d, GalerkinMode, TRIPLET_BYTES};
pub use mis2::{mis2_aggregate, RestrictionOperator};

use crate::error::{Error, Result};
use crate::runtime::{spgemm_1d, RunMetrics, RuntimeConfig};
use crate::semiring::Semiring;
use crate::sparse::SparseMatrix;

/// `A * A` through the sparsity-aware 1D algorithm.
pub fn square<S: Semiring>(
    a: &SparseMatrix<S::Scalar>,
    cfg: &RuntimeConfig,
    semiring: &S,
) -> Result<(SparseMatrix<S::Scalar>, RunMetrics)> {
    if !a.is_square() {
        return Err(Error::Shape(format!("cannot square a {}x{} matrix", a.nrows(), a.ncols())));
    }
    spgemm_1d(a, a, cfg, semiring)
}

//! Sparsity-aware 1D distributed sparse x sparse matrix multiplication.
//!
//! `B` and `C` stay put in a 1D block-column layout; each logical process reads
//! only the columns of `A` that its slice of `B` hits, in at most `K` blocked
//! one-sided reads per remote process. The distributed runtime is simulated
//! in-process with exact communication counters.

pub mod apps;
pub mod error;
pub mod runtime;
pub mod semiring;
pub mod layout;
pub mod local;
pub mod sparse;

pub use error::{Error, Result};
pub use semiring::{BoolOrAnd, IntPlusTimes, MmField, RealPlusTimes, Scalar, Semiring};
pub use sparse::{Index, Permutation, SparseMatrix, StorageMode, Triplet};
pub use local::{estimate_flops, spgemm_local, Accumulator, FlopsEstimate};
pub use layout::{
    compute_vertex_weights, greedy_partition, slice_local, strategy_to_permutation, Distribution1D,
    PartitionReport, PartitionVector, Strategy, VertexWeights,
};
pub use runtime::{
    analyze_cv, execute_1d, spgemm_1d, spgemm_1d_naive, CvReport, DistributedProduct, RunMetrics,
    RuntimeConfig,
};
pub use apps::{
    bc_approx, bc_batch, bc_sources, galerkin, mis2_aggregate, outer_product_1d, square, BcScores,
    GalerkinMode, RestrictionOperator,
};

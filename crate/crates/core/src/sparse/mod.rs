//! Sparse matrix storage, permutations and Matrix Market I/O.

mod matrix;
mod mm;
mod permutation;

pub use matrix::{Index, SparseMatrix, StorageMode, Triplet};
pub(crate) use matrix::ColumnBuilder;
pub use mm::{format_matrix_market, parse_matrix_market, read_matrix_market, write_matrix_market};
pub use permutation::{permute_columns, permute_rows, permute_symmetric, Permutation};

//! Sparse linear algebra kernel: compressed sparse column storage,
//! fill-reducing ordering, symbolic factorization with elimination trees,
//! level scheduling and level-parallel Cholesky factorization/solves.

mod cholesky;
mod csc;
mod market;
mod ordering;
mod symbolic;

pub use cholesky::{numeric_factorize, CholeskyFactor};
pub use csc::{CscBuilder, CscMatrix, SparseComplexMatrix, SparseRealMatrix};
pub use market::{
    dump_symbolic, read_matrix_market_real, write_matrix_market_complex, write_matrix_market_real,
};
pub use ordering::min_degree_order;
pub use symbolic::{level_schedule, symbolic_factorize, SymbolicFactorization, NO_PARENT};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("pattern is not structurally symmetric: entry ({0},{1}) has no transpose partner")]
    AsymmetricPattern(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid permutation of length {0}")]
    InvalidPermutation(usize),
    #[error("invalid elimination tree: parent[{child}] = {parent} must exceed the child index")]
    InvalidEtree { child: usize, parent: usize },
    #[error("non-positive pivot {value:.6e} at permuted column {column}: matrix is not positive definite")]
    NotPositiveDefinite { column: usize, value: f64 },
    #[error("matrix market format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

//! Sparse storage, vector kernels and the matrix-free masked operators.

mod mm;
mod operator;
mod sparse;
pub mod vector;

pub use mm::{
    parse_matrix_market, parse_vector, read_matrix_market, read_vector, to_matrix_market,
};
pub use operator::{ActiveBlock, LinearOperator, MaskedOperator, OperatorKind};
pub use sparse::SparseMatrix;

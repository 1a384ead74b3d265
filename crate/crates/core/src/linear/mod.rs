//! Exact linear algebra over a field: sparse vectors and matrices, reduced
//! echelon forms, minimal polynomials and generalized eigenspaces.

pub mod echelon;
pub mod eigen;
pub mod poly;
pub mod scalar;
pub mod sparse;

pub use echelon::{rank, rank_kernel, solve_combination, Echelon};
pub use eigen::{gen_eigen_split, local_min_poly, min_poly, EigenSplit};
pub use poly::Poly;
pub use scalar::{as_integer, binom, fmt_q, from_i64, parse_q, q, qi, Field, FromBigInt, Rational};
pub use sparse::{SparseMatrix, SparseVec};

//! Exact truncated computations around vertex operator algebras: structure
//! constant files, the current Lie algebra, canonical quotient modules and
//! their spectra, Zhu's Poisson algebra, Poisson current algebras, and finite
//! module categories.

pub mod algebra;
pub mod current;
pub mod error;
pub mod linear;
pub mod modcat;
pub mod pca;
pub mod quotient;
pub mod report;
pub mod voa;
pub mod zhu;

pub use error::{Error, Result};

/// Exact rational scalar used throughout the concrete engines.
pub type Rational = linear::Rational;
pub type QVec = linear::SparseVec<Rational>;
pub type QMatrix = linear::SparseMatrix<Rational>;
pub type QPoly = linear::Poly<Rational>;

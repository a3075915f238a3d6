//! Numerical toolkit for finite-blocklength entanglement distillation:
//! quantum divergences, optimal type-II errors over the PPT cone, the
//! threshold-projector distillation protocol, and error-exponent curves.
//!
//! Everything is desk-scale dense linear algebra: bipartite systems of a
//! few qubits, a handful of copies, all logarithms base 2, all divergences
//! in bits.

pub mod cli;
pub mod conic;
pub mod divergence;
pub mod error;
pub mod exponent;
pub mod linalg;
pub mod protocol;
pub mod suites;

pub use error::{Error, Result};
pub use linalg::{BipartitionLayout, DensityMatrix, HermitianOperator};

//! Numerical core for fixed-point boundary matrix-product states.
//!
//! The modules build on each other bottom-up: dense tensors, Kraus channels,
//! finite-dimensional operator algebras, chain states with their entropies,
//! and an exact GF(2) engine for Clifford encoders.

pub mod algebra;
pub mod chain;
pub mod channel;
pub mod error;
pub mod models;
pub mod stabilizer;
pub mod tensor;
pub mod tol;

pub use error::{LabError, Result};
pub use tol::{Caps, Tolerances};

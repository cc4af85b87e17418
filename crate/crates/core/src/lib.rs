//! Numerical solver for truncated moment problems with J-self-adjoint,
//! J-skew-self-adjoint and J-unitary operators in finite-dimensional spaces.

pub mod cli;
pub mod construct;
pub mod error;
pub mod extend;
pub mod jspace;
pub mod linalg;
pub mod moments;
pub mod solver;

pub use error::{Error, Result};

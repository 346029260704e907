//! Orlicz-space tools, discrete kernels and capacities for the semilinear
//! problem `-Δu + e^u - 1 = μ` on model domains.

pub mod capacity;
pub mod config;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod measure;
pub mod orlicz;
pub mod solver;

pub use error::{Error, Result};

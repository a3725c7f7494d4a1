//! Equilibrium measures, Bergman kernels and random polynomials for
//! weighted polynomial spaces in one and two complex variables.
//!
//! The pipeline runs weight -> quadrature rule -> orthonormal basis ->
//! Toeplitz matrices and random polynomials -> zeros and mass statistics.
//! Radial weights (`|z|^{2p}/2`) are handled in closed form wherever
//! possible; other weights go through a Gram matrix and Cholesky.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bergman;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod orthobasis;
pub mod quadrature;
pub mod randvar;
pub mod runner;
pub mod special;
pub mod toeplitz;
pub mod weights;
pub mod zeros;

pub use error::{Error, Result};

/// 17 significant digits, the format used for every numeric output file.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

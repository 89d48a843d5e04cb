//! Classical toolkit for filtered quantum phase estimation.
//!
//! Filters are designed as Chebyshev or trigonometric series, applied to
//! exactly diagonalized Hubbard spectra, and priced with a shots-times-depth
//! cost model.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cost;
pub mod error;
pub mod filter;
pub mod krylov;
pub mod model;
pub mod numerics;
mod par;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! Nonlocal p-Laplacian state and source-control solvers on 1-D grids,
//! with a local weighted p-Laplacian reference and a horizon-to-zero
//! experiment harness.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod config;
pub mod control;
pub mod error;
pub mod form;
pub mod grid;
pub mod kernel;
pub mod local;
pub mod optim;
pub mod par;
pub mod profile;
pub mod run;
pub mod state;
pub mod sweep;

pub use error::{Error, Result};

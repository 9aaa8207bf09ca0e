//! Matrix-free leading-eigenvalue solvers based on coordinate-wise descent.
//!
//! The leading eigenpair `(λ₁, v₁)` of a symmetric `A` with `λ₁ > 0` is
//! recovered from the minimizers `x* = ±√λ₁·v₁` of the non-convex
//! objective `f(x) = ‖A − xxᵀ‖²_F`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod error;
pub mod harness;
pub mod landscape;
pub mod operator;

pub use error::{Error, Result};

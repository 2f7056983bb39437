// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Oracle fixtures are pasted with every printed digit.
#![cfg_attr(test, allow(clippy::excessive_precision, clippy::needless_range_loop))]

pub mod cauchy;
pub mod cli;
pub mod error;
pub mod fit;
pub mod fracops;
pub mod grid;
pub mod kernels;
pub mod quadrature;
pub mod semigroup;
pub mod spectral;
pub mod timescales;

pub use error::{Error, Result};

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod arith;
pub mod bounds;
pub mod census;
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod fields;
pub mod heights;
pub mod precision;

pub use error::{Error, Result};

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cf;
pub mod cli;
pub mod divisors;
pub mod error;
pub mod linearizer;
pub mod numeric;
pub mod series;
pub mod stability;
pub mod truncator;

pub use error::{Error, Result};
pub use numeric::Precision;

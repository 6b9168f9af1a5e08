// `!(x > 0.0)` also rejects NaN; coefficient tables keep their published digits
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod crtf;
pub mod error;
mod fft;
pub mod fields;
pub mod inversion;
pub mod phantoms;
pub mod quadrature;
pub mod rangeops;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
pub use fft::next_fast_len;

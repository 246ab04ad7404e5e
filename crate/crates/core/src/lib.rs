//! Mixed-norm slice spaces, their Herz-type variants, and the numerical tools
//! built on them: sampled fields, dyadic annuli, the Hardy-Littlewood maximal
//! operator, central block decompositions, and a reproducible verification
//! harness.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::should_implement_trait)]

pub mod blocks;
pub mod cli;
pub mod error;
pub mod fmt;
pub mod grid;
pub mod herz;
pub mod maximal;
pub mod mixed_norm;
pub mod reduce;
pub mod slice;
pub mod verify;

pub use error::{Error, Result};

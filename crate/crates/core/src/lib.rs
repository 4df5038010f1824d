//! Majority-vote opinion dynamics on geometric inhomogeneous random graphs.

// `!(x > 0.0)` guards also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod girg;
pub mod meanfield;
pub mod seed;
pub mod theory;

pub use error::{Error, Result};

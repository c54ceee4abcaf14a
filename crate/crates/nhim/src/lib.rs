//! Configuration, certificate and CSV formats, and the command line for
//! `nhim-core`.

// `!(a <= b)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod export;
pub mod report;
pub mod sweep;

pub use config::{ConfigError, RunConfig};

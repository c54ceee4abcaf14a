//! Rigorous verification of normally hyperbolic invariant manifolds for maps
//! on `R^{1+u+s}` with a periodic central coordinate, plus floating-point
//! constructions of the associated manifolds and foliations.
//!
//! The crate is `no_std` with `alloc`; file formats and the command line live
//! in the `nhim` crate.

#![no_std]
// `!(a <= b)` rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod interval;
pub mod jets;
pub mod linalg;
pub mod manifold;
pub mod maps;
pub mod rates;
pub mod verify;

pub use interval::{Interval, IntervalError, IntervalMatrix};

//! Numerical core for class rebalancing with a convex-hull constrained GAN.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation over seeded random streams; file formats, the experiment
//! runner and wall-clock timing live in the `pgan` companion crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod data;
pub mod error;
pub mod lp;
pub mod math;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod rng;
pub mod tensor;
pub mod training;

pub use error::{Error, Result};
pub use tensor::Tensor;

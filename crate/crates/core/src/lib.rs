//! Numerical core for process-tomography certified prepare-and-measure
//! device-independent QKD.
//!
//! Everything in this crate is pure computation over small dense complex
//! matrices and works without `std` (an allocator is required). File
//! formats, the command line and thread-parallel drivers live in the
//! `ediqkd` companion crate.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod channel;
pub mod classical;
pub mod error;
pub mod keyrate;
pub mod linalg;
pub mod optimize;
pub mod photonic;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
pub use linalg::{ComplexMat, C64};
pub use quantum::{DensityOp, Observable, Sign};

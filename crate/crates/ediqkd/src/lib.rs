//! Command line, configuration files, CSV output and thread-parallel
//! drivers for `ediqkd-core`.

#![forbid(unsafe_code)]

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use error::{AppError, AppResult};

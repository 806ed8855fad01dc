//! File formats, parallel sweeps and the command line for the
//! [`sysolve_core`] systolic array emulator.

pub mod cli;
pub mod error;
pub mod files;
pub mod number;
pub mod sweep;
pub mod tables;
pub mod zoo;

pub use error::{Error, Result};

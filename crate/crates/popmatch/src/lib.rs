//! File formats and command line for the `popmatch` tool.

pub mod cli;
mod error;
pub mod format;

pub use error::FormatError;

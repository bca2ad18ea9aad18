//! File formats, reports and the `mobility-kit` command line on top of
//! `mobility-core`.

pub mod cli;
pub mod config;
pub mod csvio;
pub mod error;
pub mod posefile;
pub mod report;

pub use error::{KitError, Result};

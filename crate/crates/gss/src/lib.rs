//! File formats, forcing generators and the command-line front end for
//! `gss-core`.

pub mod commands;
pub mod config;
pub mod container;
pub mod csvio;
pub mod error;
pub mod generate;

pub use error::{CliError, Result};

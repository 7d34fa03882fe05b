//! File formats, configuration and end-to-end workflows around
//! `flatbeam-core`. The `flatbeam` binary is a thin wrapper over
//! [`commands::execute`].

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod pipeline;

pub use error::{CliError, CliResult};

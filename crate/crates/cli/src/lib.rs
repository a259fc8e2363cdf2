//! Configuration loading and the `evolve`, `spectrum`, `schmidt` and
//! `validate` pipelines behind the `jcsim` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run_evolve, run_schmidt, run_spectrum, run_validate, Options};
pub use config::{load_config, parse_config, RunConfig};
pub use error::CliError;

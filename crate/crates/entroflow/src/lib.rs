//! File formats, the command line and parallel sweeps over `entroflow-core`.

pub mod cli;
pub mod commands;
pub mod error;
pub mod format;
pub mod io;
pub mod sweep;

pub use cli::{dispatch, run, Output};
pub use error::{CliError, CliResult};

//! Model files, reports and the `evoset` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod format;
pub mod model;
pub mod report;

pub use commands::{run_command, Execution};
pub use error::CliError;
pub use model::{build, load_model, parse_model, ModelFile};

//! Library side of the `blockfade` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod model_file;

pub use error::CliError;
pub use model_file::ModelFile;

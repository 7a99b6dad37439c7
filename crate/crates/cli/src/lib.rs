//! `cds` command line: graph extraction, image segmentation, fixture
//! generation, evaluation sweeps and the HTTP service.

pub mod commands;
pub mod service;

pub use commands::{run, Cli, CliError, EXIT_INPUT, EXIT_SOLVER, EXIT_USAGE};

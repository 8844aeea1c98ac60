//! Command-line front end: subcommands, table reproduction and artifacts.

pub mod app;
pub mod output;
pub mod reproduce;

pub use app::{run, EXIT_OK, EXIT_USAGE, EXIT_VERIFY};

//! Command-line front end: expression parsing, configuration and subcommand dispatch.

pub mod app;
pub mod config;
pub mod expr;

pub use app::{run, Output};

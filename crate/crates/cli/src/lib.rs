//! Command-line front end for the census search.

pub mod bound;
mod commands;

pub use commands::{run, Cli, Command};

//! File formats and subcommands behind the `approxchol` binary.

pub mod commands;
pub mod factor_io;
pub mod graph_io;
pub mod stats;

pub use commands::{run, Cli};

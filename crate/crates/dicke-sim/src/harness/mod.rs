//! Experiment harness: configuration resolution, the experiment engines
//! behind the CLI subcommands, and deterministic CSV output.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{Experiment, Overrides, RunConfig};
pub use experiments::run;

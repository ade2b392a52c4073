//! Configuration, artifacts and subcommands behind the `kahan` binary.

pub mod config;
pub mod output;
pub mod run;

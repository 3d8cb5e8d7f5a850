//! Command-line driver for `vortex-core`: config loading, the subcommands
//! and their on-disk formats.

pub mod io;
pub mod run;

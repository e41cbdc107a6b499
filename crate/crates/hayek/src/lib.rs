//! File formats, configuration and the experiment runner behind the `hayek`
//! command.

pub mod config;
pub mod ledger;
pub mod replay;
pub mod runner;
pub mod stats;
pub mod trace;
pub mod verify;

/// Exit status for a solved instance or successful command.
pub const EXIT_OK: u8 = 0;
/// Exit status for an unsolved instance or a failed check.
pub const EXIT_UNSOLVED: u8 = 1;
/// Exit status for bad usage, configuration or input files.
pub const EXIT_USAGE: u8 = 2;

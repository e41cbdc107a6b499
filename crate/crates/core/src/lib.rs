//! An economy of rule-holding agents that bid for the right to act on a
//! task, learning by auction, inheritance and temporal-difference backup of
//! bids.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command-line runner live in the `hayek` crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod blockworld;
pub mod economy;
pub mod engine;
pub mod pattern;
pub mod task;
pub mod woods;

pub use economy::{Agent, AgentId, Economy, EconomyParams, Modes};
pub use engine::{EnvKind, Experiment, Injection, RunConfig, RunStats};
pub use pattern::{parse_rule, Binding, Rule};
pub use task::Task;

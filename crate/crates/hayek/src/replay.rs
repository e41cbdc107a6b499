//! Hardwired universal-solver replay on a single world.

use std::fmt::Write as _;

use hayek_core::blockworld::{self, Blockworld, BlockworldError, BlockworldState};
use hayek_core::engine::Trace;
use hayek_core::{EnvKind, Experiment, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Where the replayed world comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Start {
    World(String),
    /// A random world of this level drawn from the seed.
    Level { level: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub start: BlockworldState,
    pub trace: Trace,
}

impl Replay {
    pub fn solved(&self) -> bool {
        self.trace.solved
    }

    /// Table in the classic layout: one row per action with the bid to two
    /// decimals, then the final world on its own.
    pub fn render(&self) -> String {
        let width = |f: fn(&hayek_core::engine::TraceRow) -> usize, min: usize| {
            self.trace.rows.iter().map(f).max().unwrap_or(0).max(min)
        };
        let ws = width(|r| r.state.len(), self.trace.final_state.len().max(5));
        let wr = width(|r| r.rule.len(), 4);
        let wa = width(|r| r.action.len(), 6);
        let mut out = String::new();
        let _ = writeln!(out, "{:ws$}  {:wr$}  {:wa$}  bid", "world", "rule", "action");
        for r in &self.trace.rows {
            let _ = writeln!(out, "{:ws$}  {:wr$}  {:wa$}  {:.2}", r.state, r.rule, r.action, r.price);
        }
        let _ = writeln!(out, "{}", self.trace.final_state);
        out
    }
}

/// Replays the universal solver from `start`. `step_cap` overrides the
/// usual limit of ten auctions per level.
pub fn replay_universal(start: &Start, step_cap: Option<usize>) -> Result<Replay, BlockworldError> {
    let state = match start {
        Start::World(text) => BlockworldState::decode(text.trim())?,
        Start::Level { level: 0, .. } => return Err(BlockworldError::InvalidWorld("level 0".into())),
        Start::Level { level, seed } => blockworld::new_instance(*level, &mut ChaCha8Rng::seed_from_u64(*seed)),
    };
    let mut config = RunConfig::hardwired_replay(EnvKind::Blockworld);
    config.instances = 1;
    config.start_level = state.level();
    config.step_cap = step_cap.map(|c| c.max(1));
    let mut exp = Experiment::new(Blockworld::default(), config).expect("replay configuration is valid");
    let report = exp.step_from(state.clone());
    Ok(Replay {
        start: state,
        trace: report.trace,
    })
}

//! Per-instance statistics as CSV, and per-run summaries.
//!
//! Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `run` | run index within a batch |
//! | `instance` | instance number, from 1 |
//! | `level` | level the instance was played at (1 for woods) |
//! | `solved`, `halted` | 0 or 1 |
//! | `steps` | auctions held |
//! | `population` | live agents after culling and injection |
//! | `wealth_before`, `total_wealth` | agent wealth before and after the instance |
//! | `taxes`, `births`, `culled` | settlement totals; `culled` counts agents |
//! | `rewards`, `endowments`, `tax_flow`, `culled_wealth`, `sink_payments` | money entering or leaving the agents |
//! | `conservation_error` | `|Δ wealth - net flows|` |

use std::fmt;
use std::io::{self, Read, Write};

use hayek_core::economy::Flows;
use hayek_core::engine::InstanceStats;
use hayek_core::RunStats;
use thiserror::Error;

pub const HEADER: [&str; 18] = [
    "run",
    "instance",
    "level",
    "solved",
    "halted",
    "steps",
    "population",
    "wealth_before",
    "total_wealth",
    "taxes",
    "births",
    "culled",
    "rewards",
    "endowments",
    "tax_flow",
    "culled_wealth",
    "sink_payments",
    "conservation_error",
];

#[derive(Debug, Error)]
pub enum StatsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("stats line {line}: {reason}")]
    Format { line: u64, reason: String },
}

pub fn write_header<W: Write>(out: &mut W) -> io::Result<()> {
    writeln!(out, "{}", HEADER.join(","))
}

pub fn write_row<W: Write>(out: &mut W, run: usize, s: &InstanceStats) -> io::Result<()> {
    let f = &s.flows;
    writeln!(
        out,
        "{run},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        s.instance,
        s.level,
        u8::from(s.solved),
        u8::from(s.halted),
        s.steps,
        s.population,
        s.wealth_before,
        s.total_wealth,
        s.taxes,
        s.births,
        s.culled,
        f.rewards,
        f.endowments,
        f.taxes,
        f.culled,
        f.sink_payments,
        s.conservation_error()
    )
}

/// Reads a stats file back into one [`RunStats`] per run index.
pub fn read_stats<R: Read>(input: R) -> Result<Vec<RunStats>, StatsError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(HEADER.iter().copied()) {
        return Err(StatsError::Format {
            line: 1,
            reason: "unexpected header".into(),
        });
    }
    let mut runs: Vec<RunStats> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |name: &str| StatsError::Format {
            line,
            reason: format!("bad {name}"),
        };
        let int = |i: usize| record[i].parse::<u64>().map_err(|_| bad(HEADER[i]));
        let real = |i: usize| record[i].parse::<f64>().map_err(|_| bad(HEADER[i]));
        let flag = |i: usize| match &record[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad(HEADER[i])),
        };
        let run = int(0)? as usize;
        let stats = InstanceStats {
            instance: int(1)?,
            level: int(2)? as usize,
            solved: flag(3)?,
            halted: flag(4)?,
            steps: int(5)? as usize,
            population: int(6)? as usize,
            wealth_before: real(7)?,
            total_wealth: real(8)?,
            taxes: real(9)?,
            births: int(10)? as usize,
            culled: int(11)? as usize,
            flows: Flows {
                rewards: real(12)?,
                endowments: real(13)?,
                taxes: real(14)?,
                culled: real(15)?,
                sink_payments: real(16)?,
            },
        };
        if runs.len() <= run {
            runs.resize_with(run + 1, RunStats::default);
        }
        runs[run].instances.push(stats);
    }
    Ok(runs)
}

/// Length of the solved streak used to call a run converged.
pub const CONVERGENCE_STREAK: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub instances: usize,
    pub solved: usize,
    pub max_level: usize,
    pub max_population: usize,
    pub final_population: usize,
    /// Instance completing the first streak of [`CONVERGENCE_STREAK`] solves.
    pub converged_at: Option<u64>,
    pub worst_conservation_error: f64,
}

impl RunSummary {
    pub fn of(run: usize, stats: &RunStats) -> Self {
        Self {
            run,
            instances: stats.instances.len(),
            solved: stats.solved(),
            max_level: stats.max_level(),
            max_population: stats.max_population(),
            final_population: stats.instances.last().map_or(0, |s| s.population),
            converged_at: stats.first_streak(CONVERGENCE_STREAK),
            worst_conservation_error: stats
                .instances
                .iter()
                .map(InstanceStats::conservation_error)
                .fold(0.0, f64::max),
        }
    }

    pub const TITLE: &'static str = "run\tinstances\tsolved\tmax_level\tmax_pop\tfinal_pop\tconverged_at\tmax_cons_err";
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let converged = self.converged_at.map_or_else(|| "-".to_string(), |i| i.to_string());
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.1e}",
            self.run,
            self.instances,
            self.solved,
            self.max_level,
            self.max_population,
            self.final_population,
            converged,
            self.worst_conservation_error
        )
    }
}

//! Seeded experiment runs with trace, ledger and stats output.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use hayek_core::blockworld::Blockworld;
use hayek_core::engine::derive_seed;
use hayek_core::woods::Woods;
use hayek_core::{EnvKind, Experiment, RunConfig, RunStats, Task};
use rayon::prelude::*;

use crate::{ledger, stats, trace};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub trace: Option<PathBuf>,
    pub ledger: Option<PathBuf>,
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub run: usize,
    pub seed: u64,
    pub stats: RunStats,
}

/// Seed of run `run` in a batch of `runs`. A single run uses the configured
/// seed itself; batch members derive theirs from it.
pub fn run_seed(master: u64, run: usize, runs: usize) -> u64 {
    if runs <= 1 {
        master
    } else {
        derive_seed(master, run as u64)
    }
}

/// `out.trace` becomes `out.run3.trace` for run 3 of a batch.
pub fn run_path(path: &Path, run: usize, runs: usize) -> PathBuf {
    if runs <= 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.run{run}.{}", ext.to_string_lossy()),
        None => format!("{stem}.run{run}"),
    };
    path.with_file_name(name)
}

pub fn woods_task(config: &RunConfig) -> Woods {
    Woods {
        carry_memory: config.carry_memory,
        ..Woods::default()
    }
}

/// Plays one run, streaming its trace and ledger to the given writers.
pub fn run_one(
    config: &RunConfig,
    trace_out: Option<&mut dyn Write>,
    ledger_out: Option<&mut dyn Write>,
) -> io::Result<RunStats> {
    match config.env {
        EnvKind::Blockworld => run_task(Blockworld::default(), config, trace_out, ledger_out),
        EnvKind::Woods => run_task(woods_task(config), config, trace_out, ledger_out),
    }
}

fn run_task<T: Task>(
    task: T,
    config: &RunConfig,
    mut trace_out: Option<&mut dyn Write>,
    mut ledger_out: Option<&mut dyn Write>,
) -> io::Result<RunStats> {
    let mut exp = Experiment::new(task, config.clone()).map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
    if let Some(out) = trace_out.as_deref_mut() {
        trace::write_header(out, config.env)?;
    }
    if let Some(out) = ledger_out.as_deref_mut() {
        ledger::write_header(out)?;
    }
    let mut run = RunStats::default();
    while !exp.is_finished() {
        let report = exp.step();
        if let Some(out) = trace_out.as_deref_mut() {
            trace::write_instance(out, report.stats.instance, report.stats.level, &report.trace)?;
        }
        if let Some(out) = ledger_out.as_deref_mut() {
            ledger::write_transfers(out, &report.transfers)?;
        }
        run.instances.push(report.stats);
    }
    Ok(run)
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

/// Runs `runs` independent seeded copies of `config` in parallel. Per-run
/// traces and ledgers go to separate files; stats are merged into one file
/// with a `run` column.
pub fn run_batch(config: &RunConfig, runs: usize, outputs: &Outputs) -> anyhow::Result<Vec<RunOutcome>> {
    let outcomes = (0..runs.max(1))
        .into_par_iter()
        .map(|run| -> anyhow::Result<RunOutcome> {
            let mut config = config.clone();
            config.seed = run_seed(config.seed, run, runs);
            let mut trace_file = outputs.trace.as_deref().map(|p| create(&run_path(p, run, runs))).transpose()?;
            let mut ledger_file = outputs.ledger.as_deref().map(|p| create(&run_path(p, run, runs))).transpose()?;
            let stats = run_one(
                &config,
                trace_file.as_mut().map(|w| w as &mut dyn Write),
                ledger_file.as_mut().map(|w| w as &mut dyn Write),
            )?;
            for file in [trace_file, ledger_file].into_iter().flatten() {
                file.into_inner().map_err(|e| e.into_error())?.sync_all()?;
            }
            log::info!("run {run} (seed {}) finished: {} of {} solved", config.seed, stats.solved(), stats.instances.len());
            Ok(RunOutcome {
                run,
                seed: config.seed,
                stats,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(path) = &outputs.stats {
        let mut out = create(path)?;
        stats::write_header(&mut out)?;
        for outcome in &outcomes {
            for s in &outcome.stats.instances {
                stats::write_row(&mut out, outcome.run, s)?;
            }
        }
        out.flush()?;
    }
    Ok(outcomes)
}

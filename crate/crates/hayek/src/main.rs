use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hayek::config::{load_config, parse_override, Origin, Setting};
use hayek::replay::{replay_universal, Start};
use hayek::runner::{run_batch, Outputs};
use hayek::stats::{read_stats, RunSummary};
use hayek::{ledger, trace, verify, EXIT_OK, EXIT_UNSOLVED, EXIT_USAGE};

/// Market economy of rule-holding agents: run, replay and inspect experiments.
#[derive(Debug, Parser)]
#[command(name = "hayek", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one or more seeded experiments.
    Run(RunArgs),
    /// Replay the hardwired universal blockworld solver on one world.
    ReplayUniversal(ReplayArgs),
    /// Re-check every row of a trace file.
    VerifyTrace(VerifyArgs),
    /// Summarise a stats file per run.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// `key = value` configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set td_rate=0.3`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    set: Vec<Setting>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    instances: Option<u64>,
    /// Independent runs, seeded from the master seed and run in parallel.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Start from the task's fixed agents with learning switched off.
    #[arg(long)]
    hardwired: bool,
    #[arg(long)]
    no_birth: bool,
    #[arg(long)]
    no_mutation: bool,
    #[arg(long)]
    no_td: bool,
    #[arg(long)]
    no_cull: bool,
    /// Trace file; batches write one per run as `NAME.runK.EXT`.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Ledger file; batches write one per run.
    #[arg(long)]
    ledger: Option<PathBuf>,
    /// Stats CSV for all runs.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    /// World text such as `babc:cbb::a`.
    #[arg(conflicts_with = "level", required_unless_present = "level")]
    world: Option<String>,
    /// Draw a random world of this level instead.
    #[arg(long)]
    level: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Auction limit; defaults to ten per level.
    #[arg(long)]
    step_cap: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    trace: PathBuf,
    /// Ledger written by the same run, to cross-check prices.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct StatsArgs {
    stats: PathBuf,
}

fn flag_settings(args: &RunArgs) -> Vec<Setting> {
    let mut out = Vec::new();
    let mut push = |key: &str, value: String| {
        out.push(Setting {
            key: key.to_string(),
            value,
            origin: Origin::Flag,
        })
    };
    if let Some(env) = &args.env {
        push("env", env.clone());
    }
    if args.hardwired {
        for key in ["birth", "mutation", "td", "cull"] {
            push(key, "false".into());
        }
        push("hardwired", "true".into());
    }
    for (off, key) in [
        (args.no_birth, "birth"),
        (args.no_mutation, "mutation"),
        (args.no_td, "td"),
        (args.no_cull, "cull"),
    ] {
        if off {
            push(key, "false".into());
        }
    }
    if let Some(seed) = args.seed {
        push("seed", seed.to_string());
    }
    if let Some(n) = args.instances {
        push("instances", n.to_string());
    }
    out
}

fn run(args: RunArgs) -> anyhow::Result<u8> {
    let mut overrides = args.set.clone();
    overrides.extend(flag_settings(&args));
    let config = match load_config(args.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    let outputs = Outputs {
        trace: args.trace,
        ledger: args.ledger,
        stats: args.stats,
    };
    let outcomes = run_batch(&config, args.runs, &outputs)?;
    println!("{}\tseed", RunSummary::TITLE);
    for o in &outcomes {
        println!("{}\t{}", RunSummary::of(o.run, &o.stats), o.seed);
    }
    Ok(EXIT_OK)
}

fn replay(args: ReplayArgs) -> u8 {
    let start = match (args.world, args.level) {
        (Some(world), _) => Start::World(world),
        (None, Some(level)) => Start::Level { level, seed: args.seed },
        (None, None) => unreachable!("clap requires a world or a level"),
    };
    match replay_universal(&start, args.step_cap) {
        Ok(r) => {
            print!("{}", r.render());
            if r.solved() {
                EXIT_OK
            } else {
                EXIT_UNSOLVED
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn verify_cmd(args: VerifyArgs) -> anyhow::Result<u8> {
    let read = |p: &PathBuf| fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()));
    let parsed = trace::parse_trace(&read(&args.trace)?);
    let file = match parsed {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    let transfers = match args.ledger.as_ref().map(read).transpose()? {
        Some(text) => match ledger::parse_ledger(&text) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("error: {e}");
                return Ok(EXIT_USAGE);
            }
        },
        None => None,
    };
    let report = verify::verify_trace(&file, transfers.as_deref());
    println!("{report}");
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_UNSOLVED })
}

fn stats_cmd(args: StatsArgs) -> anyhow::Result<u8> {
    let file = fs::File::open(&args.stats).with_context(|| format!("cannot read {}", args.stats.display()))?;
    let runs = match read_stats(file) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_USAGE);
        }
    };
    println!("{}", RunSummary::TITLE);
    for (i, run) in runs.iter().enumerate().filter(|(_, r)| !r.instances.is_empty()) {
        println!("{}", RunSummary::of(i, run));
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Run(args) => run(args),
        Command::ReplayUniversal(args) => Ok(replay(args)),
        Command::VerifyTrace(args) => verify_cmd(args),
        Command::Stats(args) => stats_cmd(args),
    };
    match status {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

//! Instance loop, difficulty controller and run statistics.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::economy::{AgentId, Economy, EconomyParams, Flows, Modes, ParamError, Settlement, Transfer};
use crate::pattern::split_fields;
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    Blockworld,
    Woods,
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvKind::Blockworld => "blockworld",
            EnvKind::Woods => "woods",
        })
    }
}

impl FromStr for EnvKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blockworld" => Ok(EnvKind::Blockworld),
            "woods" => Ok(EnvKind::Woods),
            other => Err(ConfigError::UnknownEnv(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("unknown environment {0:?}")]
    UnknownEnv(String),
    #[error("unknown injection policy {0:?}")]
    UnknownInjection(String),
    #[error("instance budget must be at least 1")]
    InstanceBudget,
    #[error("level window must be at least 1")]
    Window,
    #[error("start level must be at least 1")]
    StartLevel,
    #[error("step cap must be at least 1")]
    StepCap,
    #[error(transparent)]
    Params(#[from] ParamError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub env: EnvKind,
    pub params: EconomyParams,
    pub seed: u64,
    pub instances: u64,
    /// Instances per level-controller decision.
    pub window: usize,
    pub start_level: usize,
    /// Overrides the task's own step cap.
    pub step_cap: Option<usize>,
    pub modes: Modes,
    /// Start from the task's fixed agent set instead of random agents.
    pub hardwired: bool,
    /// Wealth given to each hardwired agent.
    pub hardwired_wealth: f64,
    /// The world's last owner collects the next instance's opening payment.
    pub carry_ownership: bool,
    /// Woods only: keep the memory bit between instances.
    pub carry_memory: bool,
    /// Random agents created at the start of a learning run.
    pub initial_agents: usize,
    /// When fresh random agents join a learning run.
    pub injection: Injection,
    /// One fresh random agent is added after any instance that leaves fewer
    /// live agents than this, whatever the injection policy.
    pub injection_floor: usize,
}

/// Policy for adding one fresh random agent after an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    /// After every instance.
    Always,
    /// After every unsolved instance.
    Unsolved,
    /// Only to keep the population at the floor.
    Floor,
}

impl FromStr for Injection {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always" => Ok(Self::Always),
            "unsolved" => Ok(Self::Unsolved),
            "floor" => Ok(Self::Floor),
            other => Err(ConfigError::UnknownInjection(other.to_string())),
        }
    }
}

impl fmt::Display for Injection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Always => "always",
            Self::Unsolved => "unsolved",
            Self::Floor => "floor",
        })
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            env: EnvKind::Blockworld,
            params: EconomyParams::default(),
            seed: 0,
            instances: 1000,
            window: 20,
            start_level: 1,
            step_cap: None,
            modes: Modes::default(),
            hardwired: false,
            hardwired_wealth: 1000.0,
            carry_memory: false,
            carry_ownership: false,
            initial_agents: 20,
            injection: Injection::Unsolved,
            injection_floor: 20,
        }
    }
}

/// TD rate used by Woods learning runs.
pub const WOODS_TD_RATE: f64 = 0.5;

impl RunConfig {
    /// Learning-run defaults for `env`.
    pub fn new(env: EnvKind) -> Self {
        let mut config = Self {
            env,
            ..Self::default()
        };
        if env == EnvKind::Woods {
            config.instances = 5000;
            config.params.td_rate = WOODS_TD_RATE;
        }
        config
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.instances < 1 {
            return Err(ConfigError::InstanceBudget);
        }
        if self.window < 1 {
            return Err(ConfigError::Window);
        }
        if self.start_level < 1 {
            return Err(ConfigError::StartLevel);
        }
        if self.step_cap == Some(0) {
            return Err(ConfigError::StepCap);
        }
        self.params.validate()?;
        Ok(())
    }

    /// Hardwired replay: fixed agents only, no learning, births or culling.
    pub fn hardwired_replay(env: EnvKind) -> Self {
        Self {
            env,
            hardwired: true,
            modes: Modes {
                birth: false,
                mutation: false,
                td: false,
                cull: false,
            },
            ..Self::default()
        }
    }
}

/// Independent seed for run `index` of a batch started from `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub agent: AgentId,
    pub state: String,
    pub observation: String,
    pub rule: String,
    pub action: String,
    /// Auction price, i.e. the bid column.
    pub price: f64,
    /// Winner's wealth after end-of-instance settlement.
    pub wealth: f64,
    /// The winner used the epsilon bid of a never-activated agent.
    pub new_bid: bool,
    /// The winner's bid was cut down to its wealth.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub final_state: String,
    pub final_observation: String,
    pub solved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub solved: bool,
    /// Ended because no agent matched.
    pub halted: bool,
    pub steps: usize,
    pub reward_paid: f64,
    pub settlement: Settlement,
    /// Owner of the world when the instance ended.
    pub final_owner: Option<AgentId>,
}

/// Per-instance knobs for [`run_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceSettings {
    pub reward: f64,
    pub step_cap: usize,
    pub modes: Modes,
    /// Receives the opening payment; the sink does when `None`.
    pub opening_owner: Option<AgentId>,
}

/// Runs one instance from `state`: repeated auctions until the task is
/// solved, no agent matches, or the step cap is hit, followed by settlement.
pub fn run_instance<T, R>(
    task: &T,
    mut state: T::State,
    economy: &mut Economy<T::Action>,
    settings: &InstanceSettings,
    rng: &mut R,
) -> (InstanceResult, Trace, T::State)
where
    T: Task,
    R: Rng + ?Sized,
{
    economy.begin_instance();
    let mut rows = Vec::new();
    let mut owner = settings.opening_owner;
    let mut solved = task.is_solved(&state);
    let mut halted = false;
    let mut reward_paid = 0.0;

    while !solved && rows.len() < settings.step_cap {
        let observation = task.observe(&state);
        let candidates = economy.matching(&split_fields(&observation));
        let Some(win) = economy.run_auction(&candidates, owner, rng) else {
            halted = true;
            break;
        };
        owner = Some(win.agent);
        let agent = economy.agent(win.agent).expect("winner is alive");
        let action = agent.action;
        rows.push(TraceRow {
            agent: win.agent,
            state: task.state_text(&state),
            observation,
            rule: alloc::format!("{}", agent.rule),
            action: alloc::format!("{action}"),
            price: win.price,
            wealth: 0.0,
            new_bid: win.was_new,
            capped: !win.was_new && win.price < agent.bid,
        });
        if task.act(&mut state, action) {
            solved = true;
            economy.settle_reward(win.agent, settings.reward);
            reward_paid = settings.reward;
        }
    }

    let settlement = economy.finish_instance(task, reward_paid, settings.modes, rng);
    for row in &mut rows {
        row.wealth = economy.agent(row.agent).map_or(0.0, |a| a.wealth);
    }
    let result = InstanceResult {
        solved,
        halted,
        steps: rows.len(),
        reward_paid,
        final_owner: if rows.is_empty() { None } else { owner },
        settlement,
    };
    let trace = Trace {
        rows,
        final_state: task.state_text(&state),
        final_observation: task.observe(&state),
        solved,
    };
    (result, trace, state)
}

/// Level controller: up one level when at least `1 - u` of the window was
/// solved, down one (never below 1) when fewer than `u` were.
pub fn adjust_level(window: &[bool], level: usize, u: f64) -> usize {
    if window.is_empty() {
        return level;
    }
    let solved = window.iter().filter(|&&s| s).count() as f64 / window.len() as f64;
    if solved >= 1.0 - u {
        level + 1
    } else if solved < u {
        level.saturating_sub(1).max(1)
    } else {
        level
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceStats {
    pub instance: u64,
    pub level: usize,
    pub solved: bool,
    pub halted: bool,
    pub steps: usize,
    /// Live agents after culling and injection.
    pub population: usize,
    pub wealth_before: f64,
    pub total_wealth: f64,
    pub taxes: f64,
    pub births: usize,
    pub culled: usize,
    /// Money that entered or left the agent population this instance.
    pub flows: Flows,
}

impl InstanceStats {
    /// Discrepancy between the change in total wealth and the recorded flows.
    pub fn conservation_error(&self) -> f64 {
        ((self.total_wealth - self.wealth_before) - self.flows.net()).abs()
    }
}

#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub stats: InstanceStats,
    pub trace: Trace,
    pub transfers: Vec<Transfer>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub instances: Vec<InstanceStats>,
}

impl RunStats {
    pub fn solved(&self) -> usize {
        self.instances.iter().filter(|s| s.solved).count()
    }

    pub fn max_level(&self) -> usize {
        self.instances.iter().map(|s| s.level).max().unwrap_or(0)
    }

    pub fn max_population(&self) -> usize {
        self.instances.iter().map(|s| s.population).max().unwrap_or(0)
    }

    /// First instance number played at `level` or above.
    pub fn first_reaching(&self, level: usize) -> Option<u64> {
        self.instances.iter().find(|s| s.level >= level).map(|s| s.instance)
    }

    /// First instance that completes a streak of `n` consecutive solves.
    pub fn first_streak(&self, n: usize) -> Option<u64> {
        let mut streak = 0;
        for s in &self.instances {
            streak = if s.solved { streak + 1 } else { 0 };
            if streak >= n {
                return Some(s.instance);
            }
        }
        None
    }
}

/// A seeded, reproducible sequence of instances on one task.
#[derive(Debug, Clone)]
pub struct Experiment<T: Task> {
    task: T,
    config: RunConfig,
    economy: Economy<T::Action>,
    rng: ChaCha8Rng,
    level: usize,
    window: Vec<bool>,
    previous: Option<T::State>,
    /// Last owner of the world, kept across instances.
    owner: Option<AgentId>,
    played: u64,
}

impl<T: Task> Experiment<T> {
    pub fn new(task: T, config: RunConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut economy = Economy::new(config.params.clone())?;
        if config.hardwired {
            for (rule, action, bid) in task.hardwired_agents() {
                let id = economy.endow(rule, action, config.hardwired_wealth);
                let agent = economy.agent_mut(id).expect("just created");
                agent.bid = bid;
                agent.is_new = false;
                agent.exempt = true;
            }
        } else {
            economy.bootstrap_agents(&task, config.initial_agents, &mut rng);
        }
        // Founding endowments are not part of any instance.
        economy.ledger_mut().take_log();
        Ok(Self {
            task,
            level: config.start_level,
            config,
            economy,
            rng,
            window: Vec::new(),
            previous: None,
            owner: None,
            played: 0,
        })
    }

    pub fn task(&self) -> &T {
        &self.task
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn economy(&self) -> &Economy<T::Action> {
        &self.economy
    }

    pub fn economy_mut(&mut self) -> &mut Economy<T::Action> {
        &mut self.economy
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn played(&self) -> u64 {
        self.played
    }

    pub fn is_finished(&self) -> bool {
        self.played >= self.config.instances
    }

    fn settings(&self) -> InstanceSettings {
        InstanceSettings {
            reward: self.config.params.reward,
            step_cap: self
                .config
                .step_cap
                .unwrap_or_else(|| self.task.step_cap(self.level)),
            modes: self.config.modes,
            opening_owner: if self.config.carry_ownership { self.owner } else { None },
        }
    }

    /// Plays one instance drawn from the task at the current level.
    pub fn step(&mut self) -> InstanceReport {
        let state = self
            .task
            .new_instance(self.level, self.previous.as_ref(), &mut self.rng);
        self.step_from(state)
    }

    /// Plays one instance from a given start state.
    pub fn step_from(&mut self, state: T::State) -> InstanceReport {
        let settings = self.settings();
        let level = self.level;
        let wealth_before = self.economy.total_wealth();
        let flows_before = self.economy.ledger().flows();

        let (result, trace, last) =
            run_instance(&self.task, state, &mut self.economy, &settings, &mut self.rng);
        self.previous = Some(last);
        if let Some(owner) = result.final_owner {
            self.owner = Some(owner);
        }
        self.played += 1;

        let inject = match self.config.injection {
            Injection::Always => true,
            Injection::Unsolved => !result.solved,
            Injection::Floor => false,
        };
        if !self.config.hardwired
            && (inject || self.economy.population() < self.config.injection_floor)
        {
            self.economy.bootstrap_agents(&self.task, 1, &mut self.rng);
        }

        if self.task.has_levels() {
            self.window.push(result.solved);
            if self.window.len() >= self.config.window {
                self.level = adjust_level(&self.window, self.level, self.config.params.level_threshold);
                self.window.clear();
            }
        }

        let stats = InstanceStats {
            instance: self.economy.instance(),
            level,
            solved: result.solved,
            halted: result.halted,
            steps: result.steps,
            population: self.economy.population(),
            wealth_before,
            total_wealth: self.economy.total_wealth(),
            taxes: result.settlement.taxes,
            births: result.settlement.births,
            culled: result.settlement.culled.len(),
            flows: self.economy.ledger().flows().since(&flows_before),
        };
        InstanceReport {
            stats,
            trace,
            transfers: self.economy.ledger_mut().take_log(),
        }
    }

    /// Plays the remaining instance budget, handing each report to `observe`.
    pub fn run_with<F: FnMut(&InstanceReport)>(&mut self, mut observe: F) -> RunStats {
        let mut stats = RunStats::default();
        while !self.is_finished() {
            let report = self.step();
            observe(&report);
            stats.instances.push(report.stats);
        }
        stats
    }

    pub fn run(&mut self) -> RunStats {
        self.run_with(|_| {})
    }
}

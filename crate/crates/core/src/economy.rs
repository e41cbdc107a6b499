//! The agent economy.
//!
//! Agents hold one rule and one action. In every auction the agents whose
//! rules match the current observation bid; the highest bidder buys the world
//! from its previous owner and acts. The owner at the moment the task is
//! solved collects the reward. Money only enters through rewards and
//! endowments of fresh agents, and only leaves through taxes, culled agents'
//! residue and opening payments (the first purchase in an instance, which has
//! no previous owner). Every movement of money is a [`Transfer`] in the
//! [`Ledger`].

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use thiserror::Error;

use crate::pattern::Rule;
use crate::task::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub u64);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter {name} = {value} is out of range")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("spawn probabilities sum to {0}, more than 1")]
    SpawnProbabilities(f64),
}

/// Economy parameters. Defaults are the reference settings.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomyParams {
    /// Money given to every new agent (`W`).
    pub endowment: f64,
    /// Reward paid for solving an instance (`R`).
    pub reward: f64,
    /// Margin by which a never-activated agent outbids the field.
    pub epsilon: f64,
    /// Level controller threshold (`u`).
    pub level_threshold: f64,
    /// Tax per rule-match evaluation (`t`).
    pub tax_rate: f64,
    /// Share of a child's profit owed to its parent (`c`).
    pub copyright: f64,
    /// Per-symbol resampling probability for mutated children (`m`).
    pub mutation_rate: f64,
    pub p_random: f64,
    pub p_copy: f64,
    pub p_mutate: f64,
    /// Agents strictly richer than this may reproduce.
    pub birth_threshold: f64,
    /// Instances without a win after which an agent is removed.
    pub inactivity_limit: u64,
    /// TD step size for bid updates.
    pub td_rate: f64,
}

impl Default for EconomyParams {
    fn default() -> Self {
        Self {
            endowment: 10.0,
            reward: 100.0,
            epsilon: 0.01,
            level_threshold: 0.25,
            tax_rate: 1e-3,
            copyright: 0.25,
            mutation_rate: 0.5,
            p_random: 0.3,
            p_copy: 0.3,
            p_mutate: 0.3,
            birth_threshold: 1000.0,
            inactivity_limit: 100,
            td_rate: 0.1,
        }
    }
}

impl EconomyParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let non_negative = [
            ("W", self.endowment),
            ("R", self.reward),
            ("epsilon", self.epsilon),
            ("t", self.tax_rate),
            ("birth_threshold", self.birth_threshold),
        ];
        for (name, value) in non_negative {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ParamError::OutOfRange { name, value });
            }
        }
        let unit = [
            ("u", self.level_threshold),
            ("c", self.copyright),
            ("m", self.mutation_rate),
            ("p_r", self.p_random),
            ("p_c", self.p_copy),
            ("p_m", self.p_mutate),
            ("td_rate", self.td_rate),
        ];
        for (name, value) in unit {
            if !(0.0..=1.0).contains(&value) {
                return Err(ParamError::OutOfRange { name, value });
            }
        }
        let total = self.p_random + self.p_copy + self.p_mutate;
        if total > 1.0 + 1e-12 {
            return Err(ParamError::SpawnProbabilities(total));
        }
        Ok(())
    }
}

/// Switches for the optional parts of the economy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Modes {
    pub birth: bool,
    /// When off, children that would be mutated are exact copies instead.
    pub mutation: bool,
    pub td: bool,
    pub cull: bool,
}

impl Default for Modes {
    fn default() -> Self {
        Self {
            birth: true,
            mutation: true,
            td: true,
            cull: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent<A> {
    pub id: AgentId,
    pub rule: Rule,
    pub action: A,
    pub bid: f64,
    pub wealth: f64,
    pub parent: Option<AgentId>,
    /// Has never won an auction.
    pub is_new: bool,
    /// Instance of the last win, or of creation if it never won.
    pub last_active_instance: u64,
    /// Rule evaluations this instance; the tax base.
    pub match_evaluations: u64,
    /// Never culled (hardwired agents).
    pub exempt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Account {
    Source,
    Sink,
    Agent(AgentId),
}

impl fmt::Display for Account {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Account::Source => f.write_str("source"),
            Account::Sink => f.write_str("sink"),
            Account::Agent(id) => write!(f, "{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferKind {
    Payment,
    Reward,
    Tax,
    Endowment,
    Copyright,
    Cull,
}

impl TransferKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransferKind::Payment => "payment",
            TransferKind::Reward => "reward",
            TransferKind::Tax => "tax",
            TransferKind::Endowment => "endowment",
            TransferKind::Copyright => "copyright",
            TransferKind::Cull => "cull",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "payment" => TransferKind::Payment,
            "reward" => TransferKind::Reward,
            "tax" => TransferKind::Tax,
            "endowment" => TransferKind::Endowment,
            "copyright" => TransferKind::Copyright,
            "cull" => TransferKind::Cull,
            _ => return None,
        })
    }
}

impl fmt::Display for TransferKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub instance: u64,
    pub from: Account,
    pub to: Account,
    pub amount: f64,
    pub kind: TransferKind,
}

/// Cumulative money entering and leaving the agent population.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Flows {
    pub rewards: f64,
    pub endowments: f64,
    pub taxes: f64,
    pub culled: f64,
    /// Opening payments, which have no previous owner to receive them.
    pub sink_payments: f64,
}

impl Flows {
    /// Net change in total agent wealth implied by these flows.
    pub fn net(&self) -> f64 {
        self.rewards + self.endowments - self.taxes - self.culled - self.sink_payments
    }

    pub fn since(&self, earlier: &Flows) -> Flows {
        Flows {
            rewards: self.rewards - earlier.rewards,
            endowments: self.endowments - earlier.endowments,
            taxes: self.taxes - earlier.taxes,
            culled: self.culled - earlier.culled,
            sink_payments: self.sink_payments - earlier.sink_payments,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ledger {
    log: Vec<Transfer>,
    source_issued: f64,
    sink_received: f64,
    flows: Flows,
}

impl Ledger {
    fn record(&mut self, transfer: Transfer) {
        match transfer.from {
            Account::Source => {
                self.source_issued += transfer.amount;
                match transfer.kind {
                    TransferKind::Reward => self.flows.rewards += transfer.amount,
                    _ => self.flows.endowments += transfer.amount,
                }
            }
            Account::Sink => {}
            Account::Agent(_) => {}
        }
        if transfer.to == Account::Sink {
            self.sink_received += transfer.amount;
            match transfer.kind {
                TransferKind::Tax => self.flows.taxes += transfer.amount,
                TransferKind::Cull => self.flows.culled += transfer.amount,
                _ => self.flows.sink_payments += transfer.amount,
            }
        }
        self.log.push(transfer);
    }

    /// Transfers since the last call.
    pub fn take_log(&mut self) -> Vec<Transfer> {
        core::mem::take(&mut self.log)
    }

    pub fn log(&self) -> &[Transfer] {
        &self.log
    }

    pub fn flows(&self) -> Flows {
        self.flows
    }

    pub fn source_issued(&self) -> f64 {
        self.source_issued
    }

    pub fn sink_received(&self) -> f64 {
        self.sink_received
    }
}

/// One auction won during the current instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Win {
    pub agent: AgentId,
    pub price: f64,
    /// The winner had never won before and used the epsilon bid.
    pub was_new: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpawnKind {
    Random,
    Copy,
    Mutate,
}

/// Draws the kind of child to create, or `None` with the residual
/// probability `1 - (p_r + p_c + p_m)`.
pub fn choose_spawn_kind<R: Rng + ?Sized>(params: &EconomyParams, rng: &mut R) -> Option<SpawnKind> {
    let roll: f64 = rng.gen();
    if roll < params.p_random {
        Some(SpawnKind::Random)
    } else if roll < params.p_random + params.p_copy {
        Some(SpawnKind::Copy)
    } else if roll < params.p_random + params.p_copy + params.p_mutate {
        Some(SpawnKind::Mutate)
    } else {
        None
    }
}

/// Bookkeeping returned by [`Economy::finish_instance`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settlement {
    pub taxes: f64,
    pub births: usize,
    pub culled: Vec<AgentId>,
    pub copyright_paid: f64,
}

#[derive(Debug, Clone)]
pub struct Economy<A> {
    params: EconomyParams,
    agents: Vec<Agent<A>>,
    ledger: Ledger,
    next_id: u64,
    instance: u64,
    round: Vec<Win>,
    revenue: BTreeMap<AgentId, f64>,
}

impl<A: Copy + PartialEq> Economy<A> {
    pub fn new(params: EconomyParams) -> Result<Self, ParamError> {
        params.validate()?;
        Ok(Self {
            params,
            agents: Vec::new(),
            ledger: Ledger::default(),
            next_id: 1,
            instance: 0,
            round: Vec::new(),
            revenue: BTreeMap::new(),
        })
    }

    pub fn params(&self) -> &EconomyParams {
        &self.params
    }

    pub fn agents(&self) -> &[Agent<A>] {
        &self.agents
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn ledger_mut(&mut self) -> &mut Ledger {
        &mut self.ledger
    }

    /// Number of the instance in progress (or last finished).
    pub fn instance(&self) -> u64 {
        self.instance
    }

    pub fn population(&self) -> usize {
        self.agents.len()
    }

    pub fn total_wealth(&self) -> f64 {
        self.agents.iter().map(|a| a.wealth).sum()
    }

    /// Auctions won so far in the current instance.
    pub fn round(&self) -> &[Win] {
        &self.round
    }

    fn index_of(&self, id: AgentId) -> Option<usize> {
        self.agents.binary_search_by_key(&id, |a| a.id).ok()
    }

    pub fn agent(&self, id: AgentId) -> Option<&Agent<A>> {
        self.index_of(id).map(|i| &self.agents[i])
    }

    pub fn agent_mut(&mut self, id: AgentId) -> Option<&mut Agent<A>> {
        self.index_of(id).map(move |i| &mut self.agents[i])
    }

    fn balance_mut(&mut self, account: Account) -> Option<&mut f64> {
        match account {
            Account::Agent(id) => self.agent_mut(id).map(|a| &mut a.wealth),
            _ => None,
        }
    }

    /// Moves `amount` between accounts and logs it. Agent balances are
    /// never driven below zero; callers cap amounts first.
    fn transfer(&mut self, from: Account, to: Account, amount: f64, kind: TransferKind) {
        debug_assert!(amount >= 0.0);
        if let Some(balance) = self.balance_mut(from) {
            debug_assert!(*balance + 1e-9 >= amount);
            *balance = (*balance - amount).max(0.0);
        }
        if let Some(balance) = self.balance_mut(to) {
            *balance += amount;
        }
        self.ledger.record(Transfer {
            instance: self.instance,
            from,
            to,
            amount,
            kind,
        });
    }

    /// Creates a never-activated agent funded with `wealth` from the source.
    pub fn endow(&mut self, rule: Rule, action: A, wealth: f64) -> AgentId {
        let id = self.push_agent(rule, action, None);
        self.transfer(Account::Source, Account::Agent(id), wealth, TransferKind::Endowment);
        id
    }

    fn push_agent(&mut self, rule: Rule, action: A, parent: Option<AgentId>) -> AgentId {
        let id = AgentId(self.next_id);
        self.next_id += 1;
        self.agents.push(Agent {
            id,
            rule,
            action,
            bid: 0.0,
            wealth: 0.0,
            parent,
            is_new: true,
            last_active_instance: self.instance,
            match_evaluations: 0,
            exempt: false,
        });
        id
    }

    /// `n` agents with random rules and actions, each endowed with `W`.
    pub fn bootstrap_agents<T, R>(&mut self, task: &T, n: usize, rng: &mut R) -> Vec<AgentId>
    where
        T: Task<Action = A>,
        R: Rng + ?Sized,
    {
        (0..n)
            .map(|_| {
                let rule = task.random_rule(rng);
                let action = task.random_action(rng);
                self.endow(rule, action, self.params.endowment)
            })
            .collect()
    }

    /// Starts the next instance.
    pub fn begin_instance(&mut self) {
        self.instance += 1;
        self.round.clear();
        self.revenue.clear();
    }

    /// Indices of agents whose rule matches the split observation. Every
    /// evaluation counts towards the agent's tax base.
    pub fn matching(&mut self, fields: &[&[u8]]) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, agent) in self.agents.iter_mut().enumerate() {
            agent.match_evaluations += 1;
            if agent.rule.is_match_fields(fields) {
                out.push(i);
            }
        }
        out
    }

    /// Effective bids of `candidates` (agent indices), in the same order.
    ///
    /// Established agents bid their learned bid; never-activated agents bid
    /// epsilon above the best established bid. Both are capped by wealth.
    pub fn effective_bids(&self, candidates: &[usize]) -> Vec<f64> {
        let established = candidates
            .iter()
            .map(|&i| &self.agents[i])
            .filter(|a| !a.is_new)
            .map(|a| a.bid.min(a.wealth))
            .fold(0.0f64, f64::max);
        candidates
            .iter()
            .map(|&i| {
                let a = &self.agents[i];
                let bid = if a.is_new {
                    established + self.params.epsilon
                } else {
                    a.bid
                };
                bid.min(a.wealth).max(0.0)
            })
            .collect()
    }

    /// Runs one auction among `candidates` (agent indices). The winner pays
    /// its effective bid to `previous_owner`, or to the sink when there is
    /// none. Returns `None` for an empty field, which halts the instance.
    ///
    /// Ties are broken uniformly at random.
    pub fn run_auction<R: Rng + ?Sized>(
        &mut self,
        candidates: &[usize],
        previous_owner: Option<AgentId>,
        rng: &mut R,
    ) -> Option<Win> {
        if candidates.is_empty() {
            return None;
        }
        let bids = self.effective_bids(candidates);
        let best = bids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let top: Vec<usize> = (0..candidates.len()).filter(|&k| bids[k] == best).collect();
        let pick = if top.len() == 1 {
            top[0]
        } else {
            top[rng.gen_range(0..top.len())]
        };

        let winner = &mut self.agents[candidates[pick]];
        let id = winner.id;
        let was_new = winner.is_new;
        winner.last_active_instance = self.instance;
        let price = bids[pick];
        let to = match previous_owner {
            Some(owner) if self.index_of(owner).is_some() => Account::Agent(owner),
            _ => Account::Sink,
        };
        self.transfer(Account::Agent(id), to, price, TransferKind::Payment);
        if let Account::Agent(owner) = to {
            *self.revenue.entry(owner).or_insert(0.0) += price;
        }
        let win = Win {
            agent: id,
            price,
            was_new,
        };
        self.round.push(win);
        Some(win)
    }

    /// Pays the task reward from the source to the current owner.
    pub fn settle_reward(&mut self, owner: AgentId, reward: f64) {
        if reward <= 0.0 || self.index_of(owner).is_none() {
            return;
        }
        self.transfer(Account::Source, Account::Agent(owner), reward, TransferKind::Reward);
        *self.revenue.entry(owner).or_insert(0.0) += reward;
    }

    /// Net profit of `agent` in the current instance: payments received plus
    /// reward, minus prices paid.
    pub fn instance_profit(&self, agent: AgentId) -> f64 {
        let revenue = self.revenue.get(&agent).copied().unwrap_or(0.0);
        let cost: f64 = self
            .round
            .iter()
            .filter(|w| w.agent == agent)
            .map(|w| w.price)
            .sum();
        revenue - cost
    }

    /// Remits the copyright share of a positive profit to a living parent.
    /// Returns the amount paid.
    pub fn settle_copyright(&mut self, child: AgentId, profit: f64) -> f64 {
        if profit <= 0.0 {
            return 0.0;
        }
        let Some(agent) = self.agent(child) else {
            return 0.0;
        };
        let Some(parent) = agent.parent else {
            return 0.0;
        };
        if self.index_of(parent).is_none() {
            return 0.0;
        }
        let amount = (self.params.copyright * profit).min(agent.wealth);
        if amount <= 0.0 {
            return 0.0;
        }
        self.transfer(Account::Agent(child), Account::Agent(parent), amount, TransferKind::Copyright);
        amount
    }

    /// TD backup of bids along the instance's winners.
    ///
    /// Winner `k` moves its bid towards the price paid by winner `k + 1`; the
    /// last winner moves towards `reward` (zero when unsolved). A winner's
    /// first ever win instead sets its bid to the price it paid. With `rate`
    /// zero only that initialisation happens.
    pub fn td_update(&mut self, wins: &[Win], reward: f64, rate: f64) {
        for (k, win) in wins.iter().enumerate() {
            let target = wins.get(k + 1).map_or(reward, |next| next.price);
            let Some(agent) = self.agent_mut(win.agent) else {
                continue;
            };
            if win.was_new && agent.is_new {
                agent.bid = win.price;
                agent.is_new = false;
            } else if win.was_new {
                // Later wins in the same instance as the first one.
            } else {
                agent.bid += rate * (target - agent.bid);
            }
        }
    }

    /// Charges every agent `t` per rule evaluation, capped at its wealth, and
    /// resets the counters. Returns the total collected.
    pub fn collect_taxes(&mut self) -> f64 {
        let rate = self.params.tax_rate;
        let mut total = 0.0;
        for i in 0..self.agents.len() {
            let agent = &mut self.agents[i];
            let due = rate * agent.match_evaluations as f64;
            agent.match_evaluations = 0;
            let paid = due.min(agent.wealth);
            if paid > 0.0 {
                let id = agent.id;
                self.transfer(Account::Agent(id), Account::Sink, paid, TransferKind::Tax);
                total += paid;
            }
        }
        total
    }

    /// Lets the agent reproduce if it is richer than the birth threshold.
    /// The child is funded with `W` out of the parent's wealth.
    pub fn maybe_spawn<T, R>(&mut self, parent: AgentId, task: &T, mutation: bool, rng: &mut R) -> Option<AgentId>
    where
        T: Task<Action = A>,
        R: Rng + ?Sized,
    {
        let agent = self.agent(parent)?;
        if agent.wealth <= self.params.birth_threshold || agent.wealth < self.params.endowment {
            return None;
        }
        let kind = choose_spawn_kind(&self.params, rng)?;
        let (rule, action) = match kind {
            SpawnKind::Random => (task.random_rule(rng), task.random_action(rng)),
            SpawnKind::Copy => (agent.rule.clone(), agent.action),
            SpawnKind::Mutate if !mutation => (agent.rule.clone(), agent.action),
            SpawnKind::Mutate => {
                let m = self.params.mutation_rate;
                let rule = task.mutate_rule(&agent.rule, m, rng);
                let action = if rng.gen_bool(m) {
                    task.random_action(rng)
                } else {
                    agent.action
                };
                (rule, action)
            }
        };
        let child = self.push_agent(rule, action, Some(parent));
        let w = self.params.endowment;
        self.transfer(Account::Agent(parent), Account::Agent(child), w, TransferKind::Endowment);
        Some(child)
    }

    /// Removes non-exempt agents that have not won for `inactivity_limit`
    /// instances; their wealth goes to the sink.
    pub fn cull_inactive(&mut self) -> Vec<AgentId> {
        let now = self.instance;
        let limit = self.params.inactivity_limit;
        let doomed: Vec<AgentId> = self
            .agents
            .iter()
            .filter(|a| !a.exempt && now.saturating_sub(a.last_active_instance) >= limit)
            .map(|a| a.id)
            .collect();
        for &id in &doomed {
            let wealth = self.agent(id).map_or(0.0, |a| a.wealth);
            if wealth > 0.0 {
                self.transfer(Account::Agent(id), Account::Sink, wealth, TransferKind::Cull);
            }
        }
        self.agents.retain(|a| !doomed.contains(&a.id));
        doomed
    }

    /// End-of-instance settlement: copyright, bid updates, taxes, births and
    /// culling, in that order. `reward` is what the final owner collected.
    pub fn finish_instance<T, R>(&mut self, task: &T, reward: f64, modes: Modes, rng: &mut R) -> Settlement
    where
        T: Task<Action = A>,
        R: Rng + ?Sized,
    {
        let mut settlement = Settlement::default();

        let mut winners: Vec<AgentId> = self.round.iter().map(|w| w.agent).collect();
        winners.sort_unstable();
        winners.dedup();
        for id in winners {
            let profit = self.instance_profit(id);
            settlement.copyright_paid += self.settle_copyright(id, profit);
        }

        let wins = self.round.clone();
        let rate = if modes.td { self.params.td_rate } else { 0.0 };
        self.td_update(&wins, reward, rate);

        settlement.taxes = self.collect_taxes();

        if modes.birth {
            let eligible: Vec<AgentId> = self
                .agents
                .iter()
                .filter(|a| a.wealth > self.params.birth_threshold)
                .map(|a| a.id)
                .collect();
            for id in eligible {
                if self.maybe_spawn(id, task, modes.mutation, rng).is_some() {
                    settlement.births += 1;
                }
            }
        }

        if modes.cull {
            settlement.culled = self.cull_inactive();
        }
        settlement
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse_rule;
    use crate::woods::{Woods, WoodsAction};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Eco = Economy<WoodsAction>;

    fn eco() -> Eco {
        Economy::new(EconomyParams::default()).unwrap()
    }

    fn any_rule() -> Rule {
        parse_rule("*:*:*:*:*", "01").unwrap()
    }

    fn established(e: &mut Eco, bid: f64, wealth: f64) -> AgentId {
        let id = e.endow(any_rule(), WoodsAction::North, wealth);
        let a = e.agent_mut(id).unwrap();
        a.bid = bid;
        a.is_new = false;
        id
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn defaults_are_reference_values() {
        let p = EconomyParams::default();
        assert_eq!(
            (p.endowment, p.reward, p.epsilon, p.level_threshold, p.tax_rate),
            (10.0, 100.0, 0.01, 0.25, 1e-3)
        );
        assert_eq!(
            (p.copyright, p.mutation_rate, p.p_random, p.p_copy, p.p_mutate),
            (0.25, 0.5, 0.3, 0.3, 0.3)
        );
        assert_eq!((p.birth_threshold, p.inactivity_limit), (1000.0, 100));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_rejects_bad_values() {
        let p = EconomyParams {
            level_threshold: 2.0,
            ..EconomyParams::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::OutOfRange { name: "u", .. })));
        let p = EconomyParams {
            p_random: 0.5,
            p_copy: 0.5,
            ..EconomyParams::default()
        };
        assert!(matches!(p.validate(), Err(ParamError::SpawnProbabilities(_))));
        let p = EconomyParams {
            reward: -1.0,
            ..EconomyParams::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn higher_bid_wins() {
        let mut e = eco();
        e.begin_instance();
        let low = established(&mut e, 7.78, 100.0);
        let high = established(&mut e, 8.07, 100.0);
        let win = e.run_auction(&[0, 1], None, &mut rng()).unwrap();
        assert_eq!(win.agent, high);
        assert_eq!(win.price, 8.07);
        assert_ne!(win.agent, low);
    }

    #[test]
    fn single_candidate_pays_own_bid() {
        let mut e = eco();
        e.begin_instance();
        let a = established(&mut e, 5.0, 100.0);
        let win = e.run_auction(&[0], None, &mut rng()).unwrap();
        assert_eq!((win.agent, win.price), (a, 5.0));
        assert_eq!(e.agent(a).unwrap().wealth, 95.0);
    }

    #[test]
    fn empty_field_halts() {
        let mut e = eco();
        e.begin_instance();
        assert_eq!(e.run_auction(&[], None, &mut rng()), None);
    }

    #[test]
    fn new_agent_outbids_by_epsilon() {
        let mut e = eco();
        e.begin_instance();
        established(&mut e, 8.07, 100.0);
        let child = e.endow(any_rule(), WoodsAction::East, 10.0);
        let win = e.run_auction(&[0, 1], None, &mut rng()).unwrap();
        assert_eq!(win.agent, child);
        assert!((win.price - 8.08).abs() < 1e-12);
        assert!(win.was_new);
    }

    #[test]
    fn new_agent_bid_capped_by_wealth() {
        let mut e = eco();
        e.begin_instance();
        let rich = established(&mut e, 100.0, 500.0);
        e.endow(any_rule(), WoodsAction::East, 10.0);
        let bids = e.effective_bids(&[0, 1]);
        assert_eq!(bids, alloc::vec![100.0, 10.0]);
        assert_eq!(e.run_auction(&[0, 1], None, &mut rng()).unwrap().agent, rich);
    }

    #[test]
    fn established_bid_capped_by_wealth() {
        let mut e = eco();
        e.begin_instance();
        established(&mut e, 50.0, 20.0);
        assert_eq!(e.effective_bids(&[0]), alloc::vec![20.0]);
    }

    #[test]
    fn equal_ties_are_random_but_seeded() {
        let pick = |seed| {
            let mut e = eco();
            e.begin_instance();
            established(&mut e, 8.0, 100.0);
            established(&mut e, 8.0, 100.0);
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            e.run_auction(&[0, 1], None, &mut r).unwrap().agent
        };
        let picks: Vec<_> = (0..40).map(pick).collect();
        assert!(picks.contains(&AgentId(1)) && picks.contains(&AgentId(2)));
        assert_eq!(picks, (0..40).map(pick).collect::<Vec<_>>());
    }

    #[test]
    fn payment_goes_to_previous_owner() {
        let mut e = eco();
        e.begin_instance();
        let first = established(&mut e, 10.0, 100.0);
        let second = established(&mut e, 20.0, 100.0);
        e.run_auction(&[0], None, &mut rng());
        e.run_auction(&[1], Some(first), &mut rng());
        assert_eq!(e.agent(first).unwrap().wealth, 110.0);
        assert_eq!(e.agent(second).unwrap().wealth, 80.0);
        assert_eq!(e.ledger().flows().sink_payments, 10.0);
        e.settle_reward(second, 100.0);
        assert_eq!(e.instance_profit(second), 80.0);
        assert_eq!(e.instance_profit(first), 10.0);
    }

    #[test]
    fn copyright_share() {
        let mut e = eco();
        e.begin_instance();
        let parent = established(&mut e, 1.0, 100.0);
        let child = established(&mut e, 1.0, 100.0);
        e.agent_mut(child).unwrap().parent = Some(parent);
        assert_eq!(e.settle_copyright(child, 40.0), 10.0);
        assert_eq!(e.agent(parent).unwrap().wealth, 110.0);
        assert_eq!(e.agent(child).unwrap().wealth, 90.0);
        assert_eq!(e.settle_copyright(child, 0.0), 0.0);
        assert_eq!(e.settle_copyright(child, -5.0), 0.0);
        assert_eq!(e.settle_copyright(parent, 40.0), 0.0, "no parent");
    }

    #[test]
    fn copyright_skips_dead_parent() {
        let mut e = eco();
        e.begin_instance();
        let child = established(&mut e, 1.0, 100.0);
        e.agent_mut(child).unwrap().parent = Some(AgentId(999));
        assert_eq!(e.settle_copyright(child, 40.0), 0.0);
        assert_eq!(e.agent(child).unwrap().wealth, 100.0);
    }

    #[test]
    fn td_examples() {
        let mut e = eco();
        e.begin_instance();
        let a = established(&mut e, 80.0, 100.0);
        e.td_update(&[Win { agent: a, price: 80.0, was_new: false }], 100.0, 0.1);
        assert!((e.agent(a).unwrap().bid - 82.0).abs() < 1e-12);
        e.td_update(&[Win { agent: a, price: 80.0, was_new: false }], 100.0, 0.0);
        assert!((e.agent(a).unwrap().bid - 82.0).abs() < 1e-12);
    }

    #[test]
    fn td_fixed_point_at_reward() {
        let mut e = eco();
        e.begin_instance();
        let ids: Vec<_> = (0..4).map(|_| established(&mut e, 100.0, 500.0)).collect();
        let wins: Vec<_> = ids.iter().map(|&agent| Win { agent, price: 100.0, was_new: false }).collect();
        e.td_update(&wins, 100.0, 0.1);
        assert!(e.agents().iter().all(|a| a.bid == 100.0));
    }

    #[test]
    fn td_chain_targets_next_price() {
        let mut e = eco();
        e.begin_instance();
        let a = established(&mut e, 10.0, 500.0);
        let b = established(&mut e, 50.0, 500.0);
        let wins = [
            Win { agent: a, price: 10.0, was_new: false },
            Win { agent: b, price: 50.0, was_new: false },
        ];
        e.td_update(&wins, 0.0, 0.5);
        assert_eq!(e.agent(a).unwrap().bid, 30.0);
        assert_eq!(e.agent(b).unwrap().bid, 25.0);
    }

    #[test]
    fn first_win_initialises_bid() {
        let mut e = eco();
        e.begin_instance();
        let a = e.endow(any_rule(), WoodsAction::North, 10.0);
        e.td_update(&[Win { agent: a, price: 3.5, was_new: true }], 100.0, 0.1);
        let agent = e.agent(a).unwrap();
        assert_eq!(agent.bid, 3.5);
        assert!(!agent.is_new);
    }

    #[test]
    fn taxes_examples() {
        let mut e = eco();
        e.begin_instance();
        let a = established(&mut e, 1.0, 10.0);
        let poor = established(&mut e, 1.0, 0.01);
        let idle = established(&mut e, 1.0, 10.0);
        e.agent_mut(a).unwrap().match_evaluations = 30;
        e.agent_mut(poor).unwrap().match_evaluations = 30;
        let total = e.collect_taxes();
        assert!((e.agent(a).unwrap().wealth - 9.97).abs() < 1e-12);
        assert_eq!(e.agent(poor).unwrap().wealth, 0.0);
        assert_eq!(e.agent(idle).unwrap().wealth, 10.0);
        assert!((total - 0.04).abs() < 1e-12);
        assert!(e.agents().iter().all(|a| a.match_evaluations == 0));
    }

    #[test]
    fn spawn_threshold() {
        let task = Woods::default();
        let mut r = rng();
        let mut e = eco();
        e.begin_instance();
        let poor = established(&mut e, 1.0, 999.0);
        let at = established(&mut e, 1.0, 1000.0);
        for _ in 0..50 {
            assert!(e.maybe_spawn(poor, &task, true, &mut r).is_none());
            assert!(e.maybe_spawn(at, &task, true, &mut r).is_none());
        }
        let rich = established(&mut e, 1.0, 1001.0);
        let child = (0..50).find_map(|_| e.maybe_spawn(rich, &task, true, &mut r)).unwrap();
        let c = e.agent(child).unwrap();
        assert_eq!((c.wealth, c.parent, c.is_new), (10.0, Some(rich), true));
        assert_eq!(e.agent(rich).unwrap().wealth, 991.0);
    }

    #[test]
    fn copy_children_without_mutation() {
        let task = Woods::default();
        let mut r = rng();
        let mut e = eco();
        e.begin_instance();
        let rule = parse_rule("0:1:0:1:0", "01").unwrap();
        let rich = e.endow(rule.clone(), WoodsAction::East, 1e6);
        let mut p = e.params.clone();
        p.p_random = 0.0;
        p.p_copy = 0.5;
        p.p_mutate = 0.5;
        e.params = p;
        for _ in 0..100 {
            if let Some(child) = e.maybe_spawn(rich, &task, false, &mut r) {
                let c = e.agent(child).unwrap();
                assert_eq!((&c.rule, c.action), (&rule, WoodsAction::East));
            }
        }
    }

    #[test]
    fn cull_examples() {
        let mut e = eco();
        for _ in 0..100 {
            e.begin_instance();
        }
        let old = established(&mut e, 1.0, 5.0);
        e.agent_mut(old).unwrap().last_active_instance = 0;
        let fresh = established(&mut e, 1.0, 5.0);
        let keeper = established(&mut e, 1.0, 5.0);
        e.agent_mut(keeper).unwrap().last_active_instance = 0;
        e.agent_mut(keeper).unwrap().exempt = true;
        let removed = e.cull_inactive();
        assert_eq!(removed, alloc::vec![old]);
        assert!(e.agent(fresh).is_some() && e.agent(keeper).is_some());
        assert_eq!(e.ledger().flows().culled, 5.0);
    }

    #[test]
    fn flows_track_money_in_and_out() {
        let mut e = eco();
        e.begin_instance();
        let before = e.ledger().flows();
        let a = e.endow(any_rule(), WoodsAction::North, 10.0);
        e.run_auction(&[0], None, &mut rng());
        e.settle_reward(a, 100.0);
        let delta = e.ledger().flows().since(&before);
        assert!((e.total_wealth() - delta.net()).abs() < 1e-12);
        assert_eq!(e.ledger().source_issued(), 110.0);
    }
}

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::pattern::Rule;

/// An environment the economy can act on.
///
/// Besides stepping the world, a task knows its observation alphabet and how
/// to draw and mutate rules and actions for newly created agents.
pub trait Task {
    type State: Clone + PartialEq + fmt::Debug;
    type Action: Copy + PartialEq + fmt::Debug + fmt::Display;

    /// Literal symbols that may appear in observations.
    fn alphabet(&self) -> &'static str;

    fn observe(&self, state: &Self::State) -> String;

    /// Full state text for traces; for fully observable tasks this equals the
    /// observation.
    fn state_text(&self, state: &Self::State) -> String;

    fn parse_state(&self, text: &str) -> Option<Self::State>;

    fn parse_action(&self, text: &str) -> Option<Self::Action>;

    /// Applies `action`. Illegal or blocked actions leave the state unchanged.
    /// Returns whether the goal was reached.
    fn act(&self, state: &mut Self::State, action: Self::Action) -> bool;

    fn is_solved(&self, state: &Self::State) -> bool;

    /// Draws a fresh instance. `previous` is the final state of the last
    /// instance, for tasks that carry state over.
    fn new_instance<R: Rng + ?Sized>(
        &self,
        level: usize,
        previous: Option<&Self::State>,
        rng: &mut R,
    ) -> Self::State;

    /// Auction budget for one instance.
    fn step_cap(&self, level: usize) -> usize;

    /// Whether the difficulty controller applies.
    fn has_levels(&self) -> bool;

    fn random_rule<R: Rng + ?Sized>(&self, rng: &mut R) -> Rule;

    fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Action;

    /// A fixed agent set for replay runs: rule, action and bid.
    fn hardwired_agents(&self) -> Vec<(Rule, Self::Action, f64)> {
        Vec::new()
    }

    /// Resamples each rule symbol independently with probability `rate`.
    fn mutate_rule<R: Rng + ?Sized>(&self, rule: &Rule, rate: f64, rng: &mut R) -> Rule;
}

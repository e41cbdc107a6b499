//! A small Woods101-style maze with a one-bit memory register.
//!
//! ```text
//!  y=2   .  A  .  B  .
//!  y=1   L  #  F  #  R
//!       x=1 2  3  4  5
//! ```
//!
//! The agent starts at `L` or `R` and must reach the food `F`. It senses the
//! four neighbouring cells (1 = open, 0 = wall) plus the memory bit, so `A`
//! and `B` look the same and so do `L` and `R`. Observations are written
//! `n:e:s:w:m`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::pattern::{parse_rule, Element, FieldPattern, Rule};
use crate::task::Task;

pub const ALPHABET: &str = "01";

pub type Cell = (i32, i32);

pub const OPEN_CELLS: [Cell; 8] = [(1, 1), (3, 1), (5, 1), (1, 2), (2, 2), (3, 2), (4, 2), (5, 2)];
pub const START_LEFT: Cell = (1, 1);
pub const START_RIGHT: Cell = (5, 1);
pub const FOOD: Cell = (3, 1);
pub const ALIAS_A: Cell = (2, 2);
pub const ALIAS_B: Cell = (4, 2);

pub fn is_open(cell: Cell) -> bool {
    OPEN_CELLS.contains(&cell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WoodsState {
    pub pos: Cell,
    pub memory: u8,
}

impl WoodsState {
    pub fn new(pos: Cell, memory: u8) -> Option<Self> {
        (is_open(pos) && memory <= 1).then_some(Self { pos, memory })
    }
}

impl fmt::Display for WoodsState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.pos.0, self.pos.1, self.memory)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WoodsAction {
    North,
    East,
    South,
    West,
    Mem0,
    Mem1,
}

impl WoodsAction {
    pub const ALL: [WoodsAction; 6] = [
        WoodsAction::North,
        WoodsAction::East,
        WoodsAction::South,
        WoodsAction::West,
        WoodsAction::Mem0,
        WoodsAction::Mem1,
    ];

    pub const MOVES: [WoodsAction; 4] = [
        WoodsAction::North,
        WoodsAction::East,
        WoodsAction::South,
        WoodsAction::West,
    ];

    pub fn delta(self) -> Option<Cell> {
        match self {
            WoodsAction::North => Some((0, 1)),
            WoodsAction::East => Some((1, 0)),
            WoodsAction::South => Some((0, -1)),
            WoodsAction::West => Some((-1, 0)),
            WoodsAction::Mem0 | WoodsAction::Mem1 => None,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text.trim() {
            "n" => WoodsAction::North,
            "e" => WoodsAction::East,
            "s" => WoodsAction::South,
            "w" => WoodsAction::West,
            "m0" => WoodsAction::Mem0,
            "m1" => WoodsAction::Mem1,
            _ => return None,
        })
    }
}

impl fmt::Display for WoodsAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WoodsAction::North => "n",
            WoodsAction::East => "e",
            WoodsAction::South => "s",
            WoodsAction::West => "w",
            WoodsAction::Mem0 => "m0",
            WoodsAction::Mem1 => "m1",
        })
    }
}

/// Neighbour bits for north, east, south, west.
pub fn neighbours(pos: Cell) -> [u8; 4] {
    let mut bits = [0u8; 4];
    for (bit, action) in bits.iter_mut().zip(WoodsAction::MOVES) {
        let (dx, dy) = action.delta().unwrap_or((0, 0));
        *bit = u8::from(is_open((pos.0 + dx, pos.1 + dy)));
    }
    bits
}

pub fn perceive(state: &WoodsState) -> String {
    let mut out = String::with_capacity(9);
    for bit in neighbours(state.pos) {
        out.push(char::from(b'0' + bit));
        out.push(':');
    }
    out.push(char::from(b'0' + state.memory));
    out
}

/// Applies one action and returns the new state with the reward earned.
pub fn step(state: &WoodsState, action: WoodsAction, reward: f64) -> (WoodsState, f64) {
    let mut next = *state;
    match action {
        WoodsAction::Mem0 => next.memory = 0,
        WoodsAction::Mem1 => next.memory = 1,
        _ => {
            let (dx, dy) = action.delta().unwrap_or((0, 0));
            let target = (state.pos.0 + dx, state.pos.1 + dy);
            if is_open(target) {
                next.pos = target;
            }
        }
    }
    let earned = if next.pos == FOOD { reward } else { 0.0 };
    (next, earned)
}

pub fn new_instance<R: Rng + ?Sized>(rng: &mut R) -> WoodsState {
    let pos = if rng.gen_bool(0.5) { START_LEFT } else { START_RIGHT };
    WoodsState {
        pos,
        memory: u8::from(rng.gen_bool(0.5)),
    }
}

/// The eight agents of a converged memory policy: set the bit to 0 on the
/// left path and 1 on the right path, then go east at `A` and west at `B`.
pub fn converged_policy_agents() -> Vec<(Rule, WoodsAction, f64)> {
    use WoodsAction::*;
    [
        ("1:0:0:0:0", Mem1),
        ("1:*:*:0:1", North),
        ("*:*:1:0:1", Mem0),
        ("0:1:1:0:0", East),
        ("0:1:0:1:0", East),
        ("0:1:1:1:*", South),
        ("0:0:1:1:1", West),
        ("0:1:0:*:1", West),
    ]
    .iter()
    .map(|&(rule, action)| (parse_rule(rule, ALPHABET).expect("policy rule"), action, 100.0))
    .collect()
}

/// Woods as a [`Task`].
#[derive(Debug, Clone)]
pub struct Woods {
    pub step_cap: usize,
    /// Keep the memory bit from the previous instance instead of drawing it.
    pub carry_memory: bool,
}

impl Default for Woods {
    fn default() -> Self {
        Self {
            step_cap: 50,
            carry_memory: false,
        }
    }
}

fn random_field_element<R: Rng + ?Sized>(rng: &mut R) -> Element {
    match rng.gen_range(0..3) {
        0 => Element::Literal(b'0'),
        1 => Element::Literal(b'1'),
        _ => Element::Star,
    }
}

impl Task for Woods {
    type State = WoodsState;
    type Action = WoodsAction;

    fn alphabet(&self) -> &'static str {
        ALPHABET
    }

    fn observe(&self, state: &WoodsState) -> String {
        perceive(state)
    }

    fn state_text(&self, state: &WoodsState) -> String {
        alloc::format!("{state}")
    }

    fn parse_state(&self, text: &str) -> Option<WoodsState> {
        let mut it = text.split(',').map(|p| p.trim().parse::<i32>().ok());
        let x = it.next()??;
        let y = it.next()??;
        let m = it.next()??;
        if it.next().is_some() {
            return None;
        }
        WoodsState::new((x, y), u8::try_from(m).ok()?)
    }

    fn parse_action(&self, text: &str) -> Option<WoodsAction> {
        WoodsAction::parse(text)
    }

    fn act(&self, state: &mut WoodsState, action: WoodsAction) -> bool {
        let (next, _) = step(state, action, 0.0);
        *state = next;
        state.pos == FOOD
    }

    fn is_solved(&self, state: &WoodsState) -> bool {
        state.pos == FOOD
    }

    fn new_instance<R: Rng + ?Sized>(
        &self,
        _level: usize,
        previous: Option<&WoodsState>,
        rng: &mut R,
    ) -> WoodsState {
        let mut state = new_instance(rng);
        if let (true, Some(prev)) = (self.carry_memory, previous) {
            state.memory = prev.memory;
        }
        state
    }

    fn step_cap(&self, _level: usize) -> usize {
        self.step_cap
    }

    fn has_levels(&self) -> bool {
        false
    }

    fn hardwired_agents(&self) -> Vec<(Rule, WoodsAction, f64)> {
        converged_policy_agents()
    }

    fn random_rule<R: Rng + ?Sized>(&self, rng: &mut R) -> Rule {
        let fields = (0..5)
            .map(|_| FieldPattern::new(alloc::vec![random_field_element(rng)]))
            .collect();
        Rule::from_fields(fields).expect("no references")
    }

    fn random_action<R: Rng + ?Sized>(&self, rng: &mut R) -> WoodsAction {
        WoodsAction::ALL[rng.gen_range(0..WoodsAction::ALL.len())]
    }

    fn mutate_rule<R: Rng + ?Sized>(&self, rule: &Rule, rate: f64, rng: &mut R) -> Rule {
        let fields = rule
            .fields()
            .iter()
            .map(|field| {
                let elements = field
                    .elements
                    .iter()
                    .map(|&e| if rng.gen_bool(rate) { random_field_element(rng) } else { e })
                    .collect();
                FieldPattern::new(elements)
            })
            .collect();
        Rule::from_fields(fields).expect("no references")
    }
}

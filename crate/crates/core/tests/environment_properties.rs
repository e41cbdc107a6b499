use hayek_core::blockworld::{self, BlockMove, BlockworldState};
use hayek_core::woods::{self, is_open, perceive, Cell, WoodsAction, WoodsState, FOOD, OPEN_CELLS, START_LEFT, START_RIGHT};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn block_move() -> impl Strategy<Value = BlockMove> {
    (1u8..=3, 1u8..=3)
        .prop_filter("distinct stacks", |(a, b)| a != b)
        .prop_map(|(a, b)| BlockMove::new(a, b).unwrap())
}

fn woods_action() -> impl Strategy<Value = WoodsAction> {
    prop::sample::select(WoodsAction::ALL.to_vec())
}

fn sorted(mut v: Vec<u8>) -> Vec<u8> {
    v.sort_unstable();
    v
}

proptest! {
    #[test]
    fn moves_conserve_blocks_and_keep_the_target(
        level in 1usize..=8,
        seed in any::<u64>(),
        moves in prop::collection::vec(block_move(), 0..40),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let start = blockworld::new_instance(level, &mut rng);
        let target = start.target().to_vec();
        let mut state = start.clone();
        for mv in moves {
            match state.apply_move(mv) {
                Ok(next) => {
                    prop_assert_eq!(next.stack(mv.from() as usize).len() + 1, state.stack(mv.from() as usize).len());
                    state = next;
                }
                Err(_) => prop_assert!(state.stack(mv.from() as usize).is_empty()),
            }
            prop_assert_eq!(state.target(), &target[..]);
            prop_assert!(state.conserves_blocks());
            let work: Vec<u8> = (1..=3).flat_map(|i| state.stack(i).to_vec()).collect();
            prop_assert_eq!(sorted(work), sorted(target.clone()));
        }
    }

    #[test]
    fn world_text_round_trips(level in 1usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = blockworld::new_instance(level, &mut rng);
        prop_assert_eq!(state.level(), level);
        prop_assert_eq!(BlockworldState::decode(&state.encode()).unwrap(), state);
    }

    #[test]
    fn woods_position_stays_open(seed in any::<u64>(), actions in prop::collection::vec(woods_action(), 0..60)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = woods::new_instance(&mut rng);
        prop_assert!(state.pos == START_LEFT || state.pos == START_RIGHT);
        for action in actions {
            let (next, reward) = woods::step(&state, action, 100.0);
            prop_assert!(is_open(next.pos));
            prop_assert!(next.memory <= 1);
            prop_assert_eq!(reward > 0.0, next.pos == FOOD);
            match action {
                WoodsAction::Mem0 | WoodsAction::Mem1 => prop_assert_eq!(next.pos, state.pos),
                _ => prop_assert_eq!(next.memory, state.memory),
            }
            if next.pos == FOOD {
                break;
            }
            state = next;
        }
    }

    #[test]
    fn woods_observation_depends_only_on_neighbourhood(a in 0usize..8, b in 0usize..8, m in 0u8..=1) {
        let (pa, pb) = (OPEN_CELLS[a], OPEN_CELLS[b]);
        let sa = WoodsState::new(pa, m).unwrap();
        let sb = WoodsState::new(pb, m).unwrap();
        prop_assert_eq!(perceive(&sa) == perceive(&sb), woods::neighbours(pa) == woods::neighbours(pb));
        let suffix = format!(":{m}");
        prop_assert!(perceive(&sa).ends_with(&suffix));
    }
}

fn reachable_observations() -> Vec<[u8; 4]> {
    let mut seen = Vec::new();
    for &cell in OPEN_CELLS.iter().filter(|&&c| c != FOOD) {
        let n = woods::neighbours(cell);
        if !seen.contains(&n) {
            seen.push(n);
        }
    }
    seen
}

/// Follows a memoryless move policy from `start` and reports whether it
/// reaches the food within the step cap.
fn reactive_policy_solves(policy: &[(usize, WoodsAction)], observations: &[[u8; 4]], start: Cell) -> bool {
    let mut state = WoodsState::new(start, 0).unwrap();
    for _ in 0..50 {
        let obs = woods::neighbours(state.pos);
        let index = observations.iter().position(|o| *o == obs).unwrap();
        let action = policy.iter().find(|(i, _)| *i == index).unwrap().1;
        let (next, reward) = woods::step(&state, action, 100.0);
        if reward > 0.0 {
            return true;
        }
        state = next;
    }
    false
}

#[test]
fn no_memoryless_reactive_policy_solves_both_starts() {
    let observations = reachable_observations();
    assert_eq!(observations.len(), 5);
    let moves = WoodsAction::MOVES;
    let total = moves.len().pow(observations.len() as u32);
    let mut left_only = 0;
    let mut right_only = 0;
    for code in 0..total {
        let policy: Vec<(usize, WoodsAction)> = (0..observations.len())
            .map(|i| (i, moves[code / moves.len().pow(i as u32) % moves.len()]))
            .collect();
        let left = reactive_policy_solves(&policy, &observations, START_LEFT);
        let right = reactive_policy_solves(&policy, &observations, START_RIGHT);
        assert!(!(left && right), "policy {policy:?} solves both");
        left_only += left as usize;
        right_only += right as usize;
    }
    // Each side on its own is solvable without memory.
    assert!(left_only > 0 && right_only > 0);
}

#[test]
fn memory_makes_both_starts_solvable() {
    // At (1,2) write 0, at (5,2) write 1, then read the bit at A/B.
    let policy = |s: &WoodsState| -> WoodsAction {
        match (woods::neighbours(s.pos), s.memory) {
            ([1, 0, 0, 0], _) => WoodsAction::North,
            ([0, 1, 1, 0], 1) => WoodsAction::Mem0,
            ([0, 1, 1, 0], 0) => WoodsAction::East,
            ([0, 0, 1, 1], 0) => WoodsAction::Mem1,
            ([0, 0, 1, 1], 1) => WoodsAction::West,
            ([0, 1, 0, 1], 0) => WoodsAction::East,
            ([0, 1, 0, 1], 1) => WoodsAction::West,
            ([0, 1, 1, 1], _) => WoodsAction::South,
            other => panic!("unexpected {other:?}"),
        }
    };
    for start in [START_LEFT, START_RIGHT] {
        for memory in 0..=1 {
            let mut state = WoodsState::new(start, memory).unwrap();
            let mut solved = false;
            for _ in 0..10 {
                let (next, reward) = woods::step(&state, policy(&state), 100.0);
                state = next;
                if reward > 0.0 {
                    solved = true;
                    break;
                }
            }
            assert!(solved, "start {start:?} memory {memory}");
        }
    }
}

//! Solver behavior: optimality against brute force, digests, replay,
//! and budget semantics.

mod common;

use common::*;
use pz_core::engine::{self, Action};
use pz_core::solver::{self, hash_state, SearchLimits, SolverError};

#[test]
fn depth_one_level_solves_immediately() {
    let game = compile(&probe_game("", "some Player on Target", "PO"));
    let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
    assert!(solution.solved);
    assert_eq!(solution.actions, vec![3], "single move right");
    assert!(solution.nodes_expanded <= 5);
}

/// Exhaustive action-sequence enumeration: the shortest winning length
/// to a bounded depth, independent of the search implementation.
fn brute_force_shortest(game: &pz_core::compile::GameDef, level: usize, max_depth: usize) -> Option<usize> {
    let actions = solver::default_action_set(game);
    let (initial, outcome) = engine::init_level(game, level, &limits()).unwrap();
    if outcome.won {
        return Some(0);
    }
    let mut layer = vec![initial];
    for depth in 1..=max_depth {
        let mut next_layer = Vec::new();
        for state in &layer {
            for &a in &actions {
                let (child, o) = engine::tick(game, state, a, &limits()).unwrap();
                if o.won {
                    return Some(depth);
                }
                next_layer.push(child);
            }
        }
        layer = next_layer;
        if layer.len() > 600_000 {
            panic!("brute force blew up; shrink the probe");
        }
    }
    None
}

#[test]
fn bfs_matches_brute_force_on_a_sokoban_probe() {
    let game = compile(&probe_game(
        "[ > Player | Crate ] -> [ > Player | > Crate ]",
        "all Target on Crate",
        "#####\n#P..#\n#.C.#\n#..O#\n#####",
    ));
    let expected = brute_force_shortest(&game, 0, 8).expect("probe solvable within depth 8");
    let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
    assert!(solution.solved);
    assert_eq!(solution.actions.len(), expected, "BFS finds the minimum");
}

#[test]
fn digests_differ_on_single_bit_flips() {
    let game = compile(&probe_game("", "", "P..\n...\n..C"));
    let state = init(&game, 0);
    let base = hash_state(&state);
    let mut seen = std::collections::HashSet::new();
    seen.insert(base);
    for object in 0..game.objects.len() as u16 {
        for cell in 0..state.cells() {
            let mut flipped = state.clone();
            flipped.set_object(object, cell, !flipped.has_object(object, cell));
            assert!(seen.insert(hash_state(&flipped)), "collision at object {object} cell {cell}");
        }
    }
}

#[test]
fn digest_ignores_forces_at_tick_boundaries() {
    let game = compile(&probe_game("", "", "C."));
    let mut state = init(&game, 0);
    let base = hash_state(&state);
    let crate_id = game.objects.id_of("crate").unwrap();
    state.set_force_bits(game.layers.layer_of[crate_id as usize], 0, 0b0010);
    assert_eq!(hash_state(&state), base, "presence planes alone feed the digest");
}

#[test]
fn replay_confirms_solver_solutions() {
    let game = load_game("sokoban_basic.txt");
    let solution = solver::solve_bfs(&game, 1, &SearchLimits::default(), &limits(), None).unwrap();
    assert!(solution.solved);
    let report =
        solver::replay(&game, 1, &solution.actions, Some(solution.terminal_digest), &limits()).unwrap();
    assert!(report.won);
    assert_eq!(report.status, solver::ReplayStatus::Success);
    assert_eq!(report.final_digest, solution.terminal_digest);

    // Truncating the solution loses the win.
    let truncated = &solution.actions[..solution.actions.len() - 1];
    let report = solver::replay(&game, 1, truncated, None, &limits()).unwrap();
    assert!(!report.won);
    assert_eq!(report.status, solver::ReplayStatus::SolutionError);
}

#[test]
fn wrong_expected_digest_is_a_state_error() {
    let game = load_game("sokoban_basic.txt");
    let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
    let report = solver::replay(&game, 0, &solution.actions, Some(0xdead_beef), &limits()).unwrap();
    assert!(report.won);
    assert_eq!(report.status, solver::ReplayStatus::StateError);
    assert_eq!(report.divergence_step, Some(solution.actions.len()));
}

#[test]
fn enlarging_the_budget_never_unsolves() {
    let game = load_game("sokoban_basic.txt");
    let small = SearchLimits { max_env_steps: 600, ..SearchLimits::default() };
    let full = SearchLimits::default();
    let a = solver::solve_bfs(&game, 1, &small, &limits(), None).unwrap();
    let b = solver::solve_bfs(&game, 1, &full, &limits(), None).unwrap();
    assert!(a.solved);
    assert!(b.solved);
    assert_eq!(a.actions, b.actions);
}

#[test]
fn disabling_dedupe_changes_costs_but_not_answers() {
    let game = compile(&probe_game(
        "[ > Player | Crate ] -> [ > Player | > Crate ]",
        "all Target on Crate",
        "####\n#P.#\n#C.#\n#O.#\n####",
    ));
    let with = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
    let without = solver::solve_bfs(
        &game,
        0,
        &SearchLimits { dedupe: false, ..SearchLimits::default() },
        &limits(),
        None,
    )
    .unwrap();
    assert_eq!(with.solved, without.solved);
    assert_eq!(with.actions.len(), without.actions.len());
    assert!(without.env_steps >= with.env_steps);
}

#[test]
fn random_games_are_refused_without_seed() {
    let game = compile(&probe_game("random [ Crate ] -> [ ]", "no Crate", "PC"));
    let err = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap_err();
    assert!(matches!(err, SolverError::RandomGame));
    // With a seed the sampled outcomes are deterministic and searchable.
    let seeded = pz_core::engine::EngineLimits { rng_seed: Some(11), ..limits() };
    let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &seeded, None).unwrap();
    assert!(solution.solved);
}

#[test]
fn action_set_includes_action_only_when_referenced() {
    let sokoban = load_game("sokoban_basic.txt");
    assert_eq!(solver::default_action_set(&sokoban).len(), 4);
    let slidings = load_game("slidings.txt");
    let set = solver::default_action_set(&slidings);
    assert_eq!(set.len(), 5);
    assert!(set.contains(&Action::Act));
}

#[test]
fn exhausting_an_unwinnable_level_reports_best_partial() {
    // No win condition can ever hold; search exhausts and returns the
    // best-scoring (here: any) sequence with solved = false.
    let game = compile(&probe_game("", "some Crate", "P.\n..")); 
    let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
    assert!(!solution.solved);
    assert!(solution.env_steps < 1000, "tiny state space exhausts quickly");
    assert!(solution.best_score > 0.0);
}

#[test]
fn committed_solution_fixture_replays_to_a_win() {
    // The solution file shipped in solutions/ plays back through the
    // full file-to-replay path, matching its recorded digest.
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../solutions/lime_rick_L1.json");
    let sol = pz_core::harness::read_solution_file(&path).expect("fixture readable");
    assert!(sol.solved);
    let game = load_game("lime_rick.txt");
    let expected = u64::from_str_radix(&sol.terminal_digest, 16).unwrap();
    let report = solver::replay(&game, sol.level, &sol.actions, Some(expected), &limits()).unwrap();
    assert!(report.won);
    assert_eq!(report.status, solver::ReplayStatus::Success);
}

#[test]
fn game_source_hash_ties_solutions_to_files() {
    let text = load_game_text("lime_rick.txt");
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../solutions/lime_rick_L1.json");
    let sol = pz_core::harness::read_solution_file(&path).unwrap();
    assert_eq!(sol.game, format!("{:016x}", solver::source_digest(&text)));
}

#[test]
fn identical_inputs_yield_identical_solutions() {
    let game = load_game("kettle.txt");
    let budget = SearchLimits { max_env_steps: 50_000, ..SearchLimits::default() };
    let a = solver::solve_bfs(&game, 9, &budget, &limits(), None).unwrap();
    let b = solver::solve_bfs(&game, 9, &budget, &limits(), None).unwrap();
    assert_eq!(a.actions, b.actions);
    assert_eq!(a.env_steps, b.env_steps);
    assert_eq!(a.nodes_expanded, b.nodes_expanded);
    assert_eq!(a.terminal_digest, b.terminal_digest);
}

#[test]
fn hard_finale_is_winnable_by_the_recorded_solution() {
    // The search budget cannot crack the last Take Heart Lass level, but
    // the recorded hand solution wins it — hard, not impossible.
    let path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../solutions/take_heart_lass_L23.json");
    let sol = pz_core::harness::read_solution_file(&path).unwrap();
    let game = load_game("take_heart_lass.txt");
    let expected = u64::from_str_radix(&sol.terminal_digest, 16).unwrap();
    let report = solver::replay(&game, sol.level, &sol.actions, Some(expected), &limits()).unwrap();
    assert!(report.won);
    assert_eq!(report.status, solver::ReplayStatus::Success);
}

//! Acceptance suite: one test per release criterion, each printing a
//! PASS line per checked item (run with `--nocapture` to see them).
//!
//! Budgets and tolerances are pinned in code; a red test here means the
//! build does not meet its contract.

mod common;

use std::collections::HashSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use pz_core::compile::{playable_level_indices, GameDef};
use pz_core::engine::{self, Action, GridState};
use pz_core::env::{self, EnvConfig};
use pz_core::harness;
use pz_core::solver::{self, SearchLimits};

const EXEMPLAR_GAMES: [&str; 13] = [
    "sokoban_basic.txt",
    "sokoban_match3.txt",
    "lime_rick.txt",
    "take_heart_lass.txt",
    "blocks.txt",
    "kettle.txt",
    "atlas_shrank.txt",
    "multiword_dictionary.txt",
    "travelling_salesman.txt",
    "zen_puzzle_garden.txt",
    "notsnake.txt",
    "slidings.txt",
    "constellation_z.txt",
];

fn full_budget() -> SearchLimits {
    SearchLimits { max_env_steps: 1_000_000, timeout: Duration::from_secs(60), dedupe: true }
}

/// Solve every playable level; returns (solved count, total, max env steps).
fn solve_game(game: &GameDef, budget: &SearchLimits) -> (usize, usize, u64) {
    let levels = playable_level_indices(game);
    let results: Vec<_> = levels
        .par_iter()
        .map(|&level| solver::solve_bfs(game, level, budget, &limits(), None).expect("search runs"))
        .collect();
    let solved = results.iter().filter(|s| s.solved).count();
    let max_steps = results.iter().map(|s| s.env_steps).max().unwrap_or(0);
    (solved, levels.len(), max_steps)
}

// ---------------------------------------------------------------------------
// 1. Compilation coverage
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_all_exemplar_games_compile() {
    let start = Instant::now();
    for name in EXEMPLAR_GAMES {
        let text = load_game_text(name);
        let compiled = pz_core::compile_source(&text)
            .unwrap_or_else(|d| panic!("{name} failed to compile:\n{d}"));
        assert!(!compiled.game.levels.is_empty(), "{name} has levels");
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(5), "compilation took {elapsed:?}, budget 5s");
    println!("ACCEPTANCE 1 compilation-coverage: PASS (13 games in {elapsed:.2?})");
}

// ---------------------------------------------------------------------------
// 2. Solved-percentage reproduction at the full search budget
// ---------------------------------------------------------------------------

enum Want {
    Exact(usize),
    AtLeast(usize),
}

#[test]
fn criterion_2_solved_counts_match_reference_table() {
    let table: [(&str, usize, Want); 12] = [
        ("sokoban_basic.txt", 2, Want::Exact(2)),
        ("sokoban_match3.txt", 2, Want::Exact(2)),
        ("slidings.txt", 11, Want::Exact(11)),
        ("travelling_salesman.txt", 11, Want::Exact(11)),
        ("kettle.txt", 11, Want::Exact(11)),
        ("constellation_z.txt", 5, Want::Exact(5)),
        ("blocks.txt", 1, Want::Exact(1)),
        ("multiword_dictionary.txt", 1, Want::Exact(1)),
        ("take_heart_lass.txt", 12, Want::AtLeast(11)),
        ("lime_rick.txt", 10, Want::AtLeast(4)),
        ("notsnake.txt", 1, Want::Exact(0)),
        ("zen_puzzle_garden.txt", 5, Want::Exact(0)),
    ];
    let budget = full_budget();
    let mut failures = Vec::new();
    for (name, total_expected, want) in &table {
        let game = load_game(name);
        let (solved, total, max_steps) = solve_game(&game, &budget);
        assert_eq!(total, *total_expected, "{name} level count");
        let ok = match want {
            Want::Exact(n) => solved == *n,
            Want::AtLeast(n) => solved >= *n,
        };
        let wanted = match want {
            Want::Exact(n) => format!("={n}"),
            Want::AtLeast(n) => format!(">={n}"),
        };
        println!(
            "ACCEPTANCE 2 solved-counts {name}: {} ({solved}/{total} solved, want {wanted}, max_env_steps {max_steps})",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(name.to_string());
        }
    }
    assert!(failures.is_empty(), "criterion 2 failures: {failures:?}");
}

// ---------------------------------------------------------------------------
// 3. Iteration magnitudes (one order of magnitude above the reference)
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_iteration_magnitudes() {
    let bounds: [(&str, u64); 3] = [
        ("constellation_z.txt", 2_000),
        ("travelling_salesman.txt", 25_000),
        ("sokoban_basic.txt", 10_000),
    ];
    let budget = full_budget();
    for (name, cap) in bounds {
        let game = load_game(name);
        let (solved, total, max_steps) = solve_game(&game, &budget);
        assert_eq!(solved, total, "{name} fully solved");
        assert!(max_steps <= cap, "{name} max env steps {max_steps} exceeds {cap}");
        println!("ACCEPTANCE 3 iteration-magnitude {name}: PASS (max {max_steps} <= {cap})");
    }
}

// ---------------------------------------------------------------------------
// 4. Engine fidelity micro-suite on the Lime Rick rule set
// ---------------------------------------------------------------------------

/// Extra glyphs for expected-grid construction: heads 2-4 and the two
/// body pieces have no level glyphs of their own.
const LR_GLYPHS: [(char, &str); 5] = [
    ('2', "playerhead2"),
    ('3', "playerhead3"),
    ('4', "playerhead4"),
    ('h', "playerbodyh"),
    ('v', "playerbodyv"),
];

fn lr_state(game: &GameDef, rows: &[&str]) -> GridState {
    GridState::from_glyph_rows(game, rows, &LR_GLYPHS).expect("probe state")
}

#[test]
fn criterion_4_lime_rick_micro_suite() {
    let game = load_game("lime_rick.txt");

    // (a) Four consecutive ups on the shipped first level: the head
    // climbs 1→2→3→4 leaving a vertical body trail, then blocks.
    let level1 = init(&game, 1);
    let tail = [
        "###################",
        "###################",
        "..#...#...#...#...#",
        "#...#...#...#...#..",
        "###################",
        "###################",
        "###################",
        "###################",
    ];
    let expect = |top: [&'static str; 7]| -> Vec<&'static str> {
        top.iter().chain(tail.iter()).copied().collect()
    };
    let after_one = expect([
        "###################",
        "#.................#",
        "#.................#",
        "#............#....#",
        "#............#....#",
        "#..2....#...##....#",
        "#..v....#...##..E.#",
    ]);
    let after_two = expect([
        "###################",
        "#.................#",
        "#.................#",
        "#............#....#",
        "#..3.........#....#",
        "#..v....#...##....#",
        "#..v....#...##..E.#",
    ]);
    let after_three = expect([
        "###################",
        "#.................#",
        "#.................#",
        "#..4.........#....#",
        "#..v.........#....#",
        "#..v....#...##....#",
        "#..v....#...##..E.#",
    ]);
    let mut state = level1;
    for (step, want) in [after_one, after_two, after_three].iter().enumerate() {
        let (next, outcome) = tick(&game, &state, Action::Up);
        assert!(outcome.changed);
        assert_eq!(
            next.digest(),
            lr_state(&game, want).digest(),
            "head state after up #{}",
            step + 1
        );
        state = next;
    }
    let (after4, outcome) = tick(&game, &state, Action::Up);
    assert!(!outcome.changed, "the fourth up is blocked");
    assert_eq!(after4.digest(), state.digest());
    println!("ACCEPTANCE 4a lime-rick-vertical-climb: PASS");

    // (b) A horizontal move past a crate pushes it and leaves a
    // horizontal body piece behind.
    let push = lr_state(&game, &["######", "#PC..#", "######"]);
    let (after, _) = tick(&game, &push, Action::Right);
    let want = lr_state(&game, &["######", "#hPC.#", "######"]);
    assert_eq!(after.digest(), want.digest(), "crate push leaves PlayerBodyH");
    println!("ACCEPTANCE 4b lime-rick-crate-push: PASS");

    // (c) Reaching an apple deletes every body piece and the apple.
    let apple = lr_state(&game, &["#######", "#vP.A.#", "#######"]);
    let (after, _) = run(&game, &apple, "rr");
    let want = lr_state(&game, &["#######", "#...P.#", "#######"]);
    assert_eq!(after.digest(), want.digest(), "apple clears the trail");
    println!("ACCEPTANCE 4c lime-rick-apple: PASS");

    // (d) Unsupported heads fall leaving a trail; crates drop freely.
    let cliff = lr_state(&game, &["########", "#P.....#", "##..C..#", "#......#", "########"]);
    let (after, _) = tick(&game, &cliff, Action::Right);
    let want = lr_state(&game, &["########", "#hv....#", "##v....#", "#.P.C..#", "########"]);
    assert_eq!(after.digest(), want.digest(), "gravity with trail; crate without");
    println!("ACCEPTANCE 4d lime-rick-gravity: PASS");

    // (e) `some player on exit` wins the tick the head arrives.
    let doorstep = lr_state(&game, &["#####", "#PE.#", "#####"]);
    let (_, outcome) = tick(&game, &doorstep, Action::Right);
    assert!(outcome.won, "exit triggers the win condition");
    println!("ACCEPTANCE 4e lime-rick-win: PASS");
}

// ---------------------------------------------------------------------------
// 5. Always-on property suites
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_property_suites() {
    // Layer exclusivity and tick quiescence across 10,000 random ticks
    // per exemplar game, plus fixpoint idempotence on sampled states.
    EXEMPLAR_GAMES.par_iter().for_each(|name| {
        let game = load_game(name);
        let mut actions = solver::default_action_set(&game);
        actions.push(Action::None);
        let level = playable_level_indices(&game)[0];
        let mut rng = ChaCha8Rng::seed_from_u64(0xacce97);
        let mut state = init(&game, level);
        let mut sampled: Vec<GridState> = Vec::new();
        for step in 0..10_000 {
            let action = actions[rng.gen_range(0..actions.len())];
            let (next, outcome) = engine::tick(&game, &state, action, &limits())
                .unwrap_or_else(|e| panic!("{name}: engine error under random play: {e}"));
            next.check_layer_exclusivity(&game)
                .unwrap_or_else(|m| panic!("{name}: layer exclusivity violated: {m}"));
            assert!(next.forces_are_zero(), "{name}: forces nonzero after tick");
            state = if outcome.won { init(&game, level) } else { next };
            if step % 10 == 0 && sampled.len() < 1_000 {
                sampled.push(state.clone());
            }
        }
        println!("ACCEPTANCE 5 exclusivity+quiescence {name}: PASS (10000 ticks)");

        let groups: Vec<_> =
            game.blocks.iter().flat_map(|b| b.groups()).chain(&game.late_groups).collect();
        for s in &sampled {
            for group in &groups {
                let (once, _) = engine::apply_rule_group(&game, s, group, &limits())
                    .unwrap_or_else(|e| panic!("{name}: group application failed: {e}"));
                let (twice, changed_again) =
                    engine::apply_rule_group(&game, &once, group, &limits()).unwrap();
                assert!(!changed_again, "{name}: group not at fixpoint after one application");
                assert!(twice.presence_eq(&once), "{name}: fixpoint state drifted");
            }
        }
        println!("ACCEPTANCE 5 fixpoint-idempotence {name}: PASS ({} states)", sampled.len());
    });

    // Exact reward telescoping over random trajectories.
    for name in EXEMPLAR_GAMES {
        let game = load_game(name);
        let cfg = EnvConfig::default();
        let level = playable_level_indices(&game)[0];
        let (mut env_state, _) = env::env_reset(&game, level, Some(5), &limits(), &cfg).unwrap();
        let initial = env_state.score;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut total = 0.0;
        let mut actions = solver::default_action_set(&game);
        actions.push(Action::None);
        for _ in 0..200 {
            if env_state.done {
                break;
            }
            let action = actions[rng.gen_range(0..actions.len())];
            let (next, _, reward, _, _) = env::env_step(&game, &env_state, action, &limits(), &cfg).unwrap();
            total += reward;
            env_state = next;
        }
        assert_eq!(total, initial - env_state.score, "{name}: telescoping must be exact");
    }
    println!("ACCEPTANCE 5 reward-telescoping: PASS (13 games)");

    // BFS optimality against exhaustive enumeration on 50 micro-games.
    let count = bfs_vs_brute_force_micro_games(50);
    println!("ACCEPTANCE 5 bfs-vs-brute-force: PASS ({count} micro-games)");

    // Replay determinism: the same seed reproduces the same digest.
    for name in EXEMPLAR_GAMES {
        let game = load_game(name);
        let level = playable_level_indices(&game)[0];
        let digest_a = random_walk_digest(&game, level, 0xd1ce);
        let digest_b = random_walk_digest(&game, level, 0xd1ce);
        assert_eq!(digest_a, digest_b, "{name}: replay determinism");
    }
    println!("ACCEPTANCE 5 replay-determinism: PASS (13 games)");
}

fn random_walk_digest(game: &GameDef, level: usize, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut actions = solver::default_action_set(game);
    actions.push(Action::None);
    let mut state = init(game, level);
    for _ in 0..300 {
        let action = actions[rng.gen_range(0..actions.len())];
        let (next, outcome) = engine::tick(game, &state, action, &limits()).unwrap();
        state = if outcome.won { init(game, level) } else { next };
    }
    state.digest()
}

/// Generate random sokoban-flavored micro-games (grids ≤ 4×4 inside a
/// wall border, solution depth ≤ 8) and compare the solver's answer to
/// exhaustive enumeration.
fn bfs_vs_brute_force_micro_games(want: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < want {
        attempts += 1;
        assert!(attempts < 40_000, "micro-game generation stalled");
        let w = rng.gen_range(3..=4);
        let h = rng.gen_range(3..=4);
        let cells: Vec<(usize, usize)> = (0..h).flat_map(|r| (0..w).map(move |c| (r, c))).collect();
        let mut free = cells.clone();
        // Sprinkle up to two walls.
        for _ in 0..rng.gen_range(0..=2) {
            if free.len() > 4 {
                let at = rng.gen_range(0..free.len());
                free.remove(at);
            }
        }
        if free.len() < 3 {
            continue;
        }
        let pick = |rng: &mut ChaCha8Rng, free: &mut Vec<(usize, usize)>| {
            let at = rng.gen_range(0..free.len());
            free.remove(at)
        };
        let player = pick(&mut rng, &mut free);
        let crate_pos = pick(&mut rng, &mut free);
        let target = pick(&mut rng, &mut free);
        let mut rows = Vec::new();
        let mut level = String::new();
        for r in 0..h {
            let mut row = String::new();
            for c in 0..w {
                let p = (r, c);
                row.push(if p == player {
                    'P'
                } else if p == crate_pos {
                    'C'
                } else if p == target {
                    'O'
                } else if cells.contains(&p) && !free.contains(&p) && p != player && p != crate_pos && p != target
                {
                    '#'
                } else {
                    '.'
                });
            }
            rows.push(row);
        }
        level.push_str(&rows.join("\n"));
        let src = probe_game(
            "[ > Player | Crate ] -> [ > Player | > Crate ]",
            "all Target on Crate",
            &level,
        );
        let Ok(compiled) = pz_core::compile_source(&src) else { continue };
        let game = compiled.game;
        let Some(expected) = brute_force_shortest(&game, 0, 8) else { continue };
        let solution = solver::solve_bfs(&game, 0, &SearchLimits::default(), &limits(), None).unwrap();
        assert!(solution.solved, "BFS must solve what brute force solves:\n{level}");
        assert_eq!(
            solution.actions.len(),
            expected,
            "BFS length must equal the brute-force minimum:\n{level}"
        );
        checked += 1;
    }
    checked
}

fn brute_force_shortest(game: &GameDef, level: usize, max_depth: usize) -> Option<usize> {
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
        if layer.len() > 300_000 {
            return None;
        }
    }
    None
}

// ---------------------------------------------------------------------------
// 6. Validation ledger taxonomy
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_corpus_ledger_taxonomy() {
    // The exemplar corpus under a small search cap: every level lands in
    // exactly one category and the counts conserve.
    let mut paths: Vec<PathBuf> = EXEMPLAR_GAMES.iter().map(|n| game_path(n)).collect();
    paths.sort();
    let small = SearchLimits { max_env_steps: 3_000, timeout: Duration::from_secs(30), dedupe: true };
    let ledger = harness::validate_corpus(&paths, &small);
    assert_eq!(ledger.counts.total(), ledger.rows.len());
    let c = &ledger.counts;
    assert_eq!(
        c.success + c.compile_error + c.runtime_error + c.solution_error + c.state_error + c.unvalidated,
        ledger.rows.len(),
        "categories sum to processed levels"
    );
    assert!(c.success > 0 && c.unvalidated > 0, "small caps split the corpus");
    println!(
        "ACCEPTANCE 6 ledger-conservation: PASS ({} rows: {} success, {} unvalidated)",
        ledger.rows.len(),
        c.success,
        c.unvalidated
    );

    // Deliberately broken fixtures land in each error category once.
    let broken_dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/broken");
    let mut broken: Vec<PathBuf> = std::fs::read_dir(&broken_dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    broken.sort();
    let small = SearchLimits { max_env_steps: 2_000, timeout: Duration::from_secs(10), dedupe: true };
    let ledger = harness::validate_corpus(&broken, &small);
    let got: HashSet<_> = ledger.rows.iter().map(|r| r.verdict).collect();
    for verdict in [
        harness::Verdict::Success,
        harness::Verdict::CompileError,
        harness::Verdict::RuntimeError,
        harness::Verdict::SolutionError,
        harness::Verdict::StateError,
        harness::Verdict::Unvalidated,
    ] {
        assert!(got.contains(&verdict), "missing category {verdict:?}");
    }
    println!("ACCEPTANCE 6 ledger-taxonomy: PASS (all six categories observed)");
}

// ---------------------------------------------------------------------------
// 7. Throughput properties
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_throughput_properties() {
    let game = load_game("sokoban_basic.txt");

    let a = harness::profile_random(&game, 0, 16, 50, 42).unwrap();
    let b = harness::profile_random(&game, 0, 16, 50, 42).unwrap();
    assert_eq!(a.content_digest, b.content_digest);
    println!("ACCEPTANCE 7 profile-determinism: PASS");

    let sweep = harness::profile_sweep(&game, 0, 25, 7).unwrap();
    for point in sweep.sweep.as_deref().unwrap_or_default() {
        assert!(point.fps > 0.0, "fps must be positive at batch {}", point.num_envs);
    }
    println!("ACCEPTANCE 7 sweep-fps: PASS");

    let start = Instant::now();
    let big = harness::profile_random(&game, 0, 1024, 100, 1).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(big.total_ticks, 102_400);
    assert!(elapsed < Duration::from_secs(60), "1024 envs × 100 steps took {elapsed:?}");
    println!(
        "ACCEPTANCE 7 batch-throughput: PASS (102400 ticks in {elapsed:.2?}, {:.0} fps)",
        big.fps
    );
}

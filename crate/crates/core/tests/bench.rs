//! Harness behavior: rollout determinism, batch sweeps, and the
//! corpus validation ledger.

mod common;

use std::path::PathBuf;
use std::time::Duration;

use common::*;
use pz_core::harness::{self, Verdict, SWEEP_BATCH_SIZES};
use pz_core::solver::SearchLimits;

fn fixture_dir(sub: &str) -> PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(sub)
}

#[test]
fn rollout_content_is_seed_deterministic() {
    let game = load_game("sokoban_basic.txt");
    let a = harness::profile_random(&game, 0, 8, 50, 1234).unwrap();
    let b = harness::profile_random(&game, 0, 8, 50, 1234).unwrap();
    assert_eq!(a.content_digest, b.content_digest, "same seed, same rollouts");
    assert_eq!(a.total_ticks, 400);
    let c = harness::profile_random(&game, 0, 8, 50, 99).unwrap();
    assert_ne!(a.content_digest, c.content_digest, "different seed diverges");
}

#[test]
fn sweep_reports_every_batch_size_with_positive_fps() {
    let game = load_game("sokoban_basic.txt");
    let report = harness::profile_sweep(&game, 0, 20, 7).unwrap();
    let sweep = report.sweep.expect("sweep series");
    assert_eq!(sweep.len(), SWEEP_BATCH_SIZES.len());
    let mut last_ticks = 0;
    for point in &sweep {
        assert!(point.fps > 0.0);
        assert!(point.total_ticks >= last_ticks, "total ticks grow with batch size");
        last_ticks = point.total_ticks;
    }
}

#[test]
fn random_agent_uses_solver_action_set_plus_none() {
    let game = load_game("slidings.txt");
    let report = harness::profile_random(&game, 1, 2, 10, 0).unwrap();
    assert_eq!(report.action_set, vec![0, 1, 2, 3, 4, 5]);
    let sokoban = load_game("sokoban_basic.txt");
    let report = harness::profile_random(&sokoban, 0, 2, 10, 0).unwrap();
    assert_eq!(report.action_set, vec![0, 1, 2, 3, 5]);
}

#[test]
fn empty_corpus_yields_zero_ledger() {
    let ledger = harness::validate_corpus(&[], &SearchLimits::default());
    assert_eq!(ledger.counts.total(), 0);
    assert!(ledger.rows.is_empty());
}

#[test]
fn broken_fixtures_land_in_every_error_category() {
    let dir = fixture_dir("broken");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    let limits = SearchLimits { max_env_steps: 2_000, timeout: Duration::from_secs(10), dedupe: true };
    let ledger = harness::validate_corpus(&paths, &limits);

    let verdict_of = |game: &str| -> Verdict {
        ledger.rows.iter().find(|r| r.game == game).map(|r| r.verdict).unwrap()
    };
    assert_eq!(verdict_of("uses_rigid"), Verdict::CompileError);
    assert_eq!(verdict_of("loops_forever"), Verdict::RuntimeError);
    assert_eq!(verdict_of("bad_solution"), Verdict::SolutionError);
    assert_eq!(verdict_of("bad_digest"), Verdict::StateError);
    assert_eq!(verdict_of("too_deep"), Verdict::Unvalidated);
    assert_eq!(verdict_of("fine"), Verdict::Success);

    // Category counts conserve the number of processed entries.
    assert_eq!(ledger.counts.total(), ledger.rows.len());
    let c = &ledger.counts;
    assert_eq!(
        c.success + c.compile_error + c.runtime_error + c.solution_error + c.state_error + c.unvalidated,
        ledger.rows.len()
    );

    // CSV and JSON forms serialize every row.
    assert_eq!(ledger.to_csv().lines().count(), ledger.rows.len() + 1);
    assert_eq!(ledger.to_json()["rows"].as_array().unwrap().len(), ledger.rows.len());
}

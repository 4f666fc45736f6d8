//! End-to-end checks of the `pz` binary: exit codes, file outputs, and
//! the solve → replay → render flow.

use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn pz() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pz"))
}

fn games_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games")
}

fn run(args: &[&str]) -> Output {
    pz().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_clean_game_exits_zero_with_summary() {
    let game = games_dir().join("lime_rick.txt");
    let out = run(&["validate", game.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert!(text.contains("11 objects, 11 rules -> 16 compiled variants"), "{text}");
}

#[test]
fn validate_broken_game_exits_one_with_json_diagnostics() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures/broken/uses_rigid.txt");
    let out = run(&["validate", fixture.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let diags: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).expect("json diagnostics");
    assert!(diags.as_array().unwrap().iter().any(|d| d["message"].as_str().unwrap().contains("rigid")));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["solve", "--definitely-not-a-flag"]);
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit 2");
}

#[test]
fn solve_all_then_replay_round_trips() {
    let dir = tempdir();
    let game = games_dir().join("sokoban_basic.txt");
    let out = run(&[
        "solve",
        game.to_str().unwrap(),
        "--all",
        "--out",
        dir.to_str().unwrap(),
        "--max-steps",
        "50000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_of(&out);
    assert_eq!(text.matches("solved=true").count(), 2, "{text}");

    let sol = dir.join("sokoban_basic_L1.json");
    assert!(sol.exists());
    let out = run(&["replay", game.to_str().unwrap(), "--level", "1", "--solution", sol.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(report["status"], "success");
    assert_eq!(report["won"], true);
}

#[test]
fn replay_with_wrong_digest_is_a_state_error() {
    let dir = tempdir();
    let game = games_dir().join("sokoban_basic.txt");
    let out = run(&[
        "solve",
        game.to_str().unwrap(),
        "--level",
        "0",
        "--out",
        dir.join("sol.json").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = run(&[
        "replay",
        game.to_str().unwrap(),
        "--level",
        "0",
        "--solution",
        dir.join("sol.json").to_str().unwrap(),
        "--expect-digest",
        "0000000000000042",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(stdout_of(&out).trim()).unwrap();
    assert_eq!(report["status"], "state_error");
}

#[test]
fn corpus_emits_conserving_counts() {
    let dir = tempdir();
    let out = run(&[
        "corpus",
        games_dir().to_str().unwrap(),
        "--max-steps",
        "1000",
        "--format",
        "csv",
        "--out",
        dir.join("ledger.csv").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("ledger.csv")).unwrap();
    let rows = csv.lines().count() - 1;
    let summary = String::from_utf8_lossy(&out.stderr);
    let total: usize = summary
        .split("total=")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .unwrap();
    assert_eq!(rows, total, "csv rows match the reported total");
}

#[test]
fn render_writes_one_png_per_step() {
    let dir = tempdir();
    let game = games_dir().join("sokoban_basic.txt");
    let sol = dir.join("sol.json");
    let out = run(&["solve", game.to_str().unwrap(), "--level", "0", "--out", sol.to_str().unwrap()]);
    assert!(out.status.success());
    let actions = {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sol).unwrap()).unwrap();
        v["actions"].as_array().unwrap().len()
    };
    let out = run(&[
        "render",
        game.to_str().unwrap(),
        "--level",
        "0",
        "--solution",
        sol.to_str().unwrap(),
        "--scale",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let pngs = std::fs::read_dir(&dir)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "png"))
        .count();
    assert_eq!(pngs, actions + 1, "initial frame plus one per action");
    assert!(dir.join("sokoban_basic_0_0.png").exists());
}

#[test]
fn play_line_mode_undo_restores_the_grid() {
    let game = games_dir().join("sokoban_basic.txt");
    let mut child = pz()
        .args(["play", game.to_str().unwrap(), "--level", "0"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("spawn");
    use std::io::Write;
    child.stdin.as_mut().unwrap().write_all(b"r\nz\nq\n").unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    // Three draws happen: initial, after `r`, after undo. Grid rows are
    // the lines made of glyphs starting with `#`; the first and last
    // seven must match exactly.
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    assert_eq!(rows.len(), 21, "three 7-row draws:\n{text}");
    assert_eq!(rows[..7], rows[14..], "undo restores the prior grid");
    assert_ne!(rows[..7], rows[7..14], "the move changed the grid first");
}

fn tempdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("pz-cli-test-{}-{:x}", std::process::id(), rand_suffix()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn rand_suffix() -> u64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now().duration_since(UNIX_EPOCH).unwrap().as_nanos() as u64
}

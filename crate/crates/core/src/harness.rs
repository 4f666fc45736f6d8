//! Batched random-rollout throughput profiling and corpus-wide
//! solve/replay validation sweeps.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compile::GameDef;
use crate::engine::{self, Action, EngineLimits};
use crate::solver::{self, ReplayStatus, SearchLimits, SolutionFile};

/// Random-rollout throughput numbers for one (game, level, batch) run.
#[derive(Debug, Clone, Serialize)]
pub struct ThroughputReport {
    pub game: String,
    pub level: usize,
    pub num_envs: usize,
    pub steps_per_env: usize,
    pub seed: u64,
    /// Actions sampled during rollouts, as wire codes (includes 5=none).
    pub action_set: Vec<u8>,
    pub total_ticks: u64,
    pub elapsed_s: f64,
    pub fps: f64,
    /// Combined digest of all final env states; fixed by the seed.
    pub content_digest: String,
    /// Per-batch-size series, present in sweep mode.
    pub sweep: Option<Vec<SweepPoint>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub num_envs: usize,
    pub total_ticks: u64,
    pub elapsed_s: f64,
    pub fps: f64,
}

/// Derive a per-env rng stream independent of worker scheduling.
fn env_rng(seed: u64, env_index: usize) -> ChaCha8Rng {
    // splitmix64 step keeps streams decorrelated for adjacent indices.
    let mut z = seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(env_index as u64 + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Run `num_envs` independent uniform-random episodes of `steps` ticks
/// each (auto-resetting on win or restart-to-done), in parallel.
/// Rollout content is a pure function of the seed; only timings vary.
pub fn profile_random(
    game: &GameDef,
    level_index: usize,
    num_envs: usize,
    steps: usize,
    seed: u64,
) -> Result<ThroughputReport, engine::EngineError> {
    let mut engine_limits = EngineLimits::default();
    if game.has_random {
        engine_limits.rng_seed = Some(seed);
    }
    // The random agent samples the solver's action set plus `none`.
    let mut actions = solver::default_action_set(game);
    actions.push(Action::None);

    let start = Instant::now();
    let digests: Result<Vec<u64>, engine::EngineError> = (0..num_envs)
        .into_par_iter()
        .map(|env_index| {
            let mut rng = env_rng(seed, env_index);
            let (mut state, _) = engine::init_level(game, level_index, &engine_limits)?;
            for _ in 0..steps {
                let action = actions[rng.gen_range(0..actions.len())];
                let (next, outcome) = engine::tick(game, &state, action, &engine_limits)?;
                if outcome.won {
                    let (fresh, _) = engine::init_level(game, level_index, &engine_limits)?;
                    state = fresh;
                } else {
                    state = next;
                }
            }
            Ok(state.digest())
        })
        .collect();
    let digests = digests?;
    let elapsed = start.elapsed().as_secs_f64();

    let mut combined: u64 = 0xcbf2_9ce4_8422_2325;
    for d in &digests {
        combined ^= d;
        combined = combined.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let total_ticks = (num_envs * steps) as u64;
    Ok(ThroughputReport {
        game: game.prelude.title.clone().unwrap_or_default(),
        level: level_index,
        num_envs,
        steps_per_env: steps,
        seed,
        action_set: actions.iter().map(|a| a.code()).collect(),
        total_ticks,
        elapsed_s: elapsed,
        fps: total_ticks as f64 / elapsed.max(1e-9),
        content_digest: format!("{combined:016x}"),
        sweep: None,
    })
}

pub const SWEEP_BATCH_SIZES: [usize; 4] = [1, 8, 64, 512];

/// Profile over a fixed series of batch sizes.
pub fn profile_sweep(
    game: &GameDef,
    level_index: usize,
    steps: usize,
    seed: u64,
) -> Result<ThroughputReport, engine::EngineError> {
    let mut points = Vec::new();
    let mut last = None;
    for &n in &SWEEP_BATCH_SIZES {
        let report = profile_random(game, level_index, n, steps, seed)?;
        points.push(SweepPoint {
            num_envs: n,
            total_ticks: report.total_ticks,
            elapsed_s: report.elapsed_s,
            fps: report.fps,
        });
        last = Some(report);
    }
    let mut report = last.expect("non-empty sweep");
    report.sweep = Some(points);
    Ok(report)
}

// ---------------------------------------------------------------------------
// Corpus validation
// ---------------------------------------------------------------------------

/// Per-level validation verdicts, mirroring the solve-then-replay
/// protocol's error taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    CompileError,
    RuntimeError,
    SolutionError,
    StateError,
    /// Search exhausted its budget without a winning sequence.
    Unvalidated,
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerRow {
    pub game: String,
    /// Level index, or `None` for whole-game failures (compile errors).
    pub level: Option<usize>,
    pub verdict: Verdict,
    pub detail: String,
    pub env_steps: u64,
    pub solution_len: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct LedgerCounts {
    pub success: usize,
    pub compile_error: usize,
    pub runtime_error: usize,
    pub solution_error: usize,
    pub state_error: usize,
    pub unvalidated: usize,
}

impl LedgerCounts {
    pub fn total(&self) -> usize {
        self.success
            + self.compile_error
            + self.runtime_error
            + self.solution_error
            + self.state_error
            + self.unvalidated
    }

    fn bump(&mut self, v: Verdict) {
        match v {
            Verdict::Success => self.success += 1,
            Verdict::CompileError => self.compile_error += 1,
            Verdict::RuntimeError => self.runtime_error += 1,
            Verdict::SolutionError => self.solution_error += 1,
            Verdict::StateError => self.state_error += 1,
            Verdict::Unvalidated => self.unvalidated += 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CorpusLedger {
    pub rows: Vec<LedgerRow>,
    pub counts: LedgerCounts,
}

impl CorpusLedger {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("game,level,verdict,env_steps,solution_len,detail\n");
        for r in &self.rows {
            let level = r.level.map(|l| l.to_string()).unwrap_or_default();
            let verdict = serde_json::to_value(r.verdict).unwrap();
            out.push_str(&format!(
                "{},{},{},{},{},\"{}\"\n",
                r.game,
                level,
                verdict.as_str().unwrap(),
                r.env_steps,
                r.solution_len,
                r.detail.replace('"', "'")
            ));
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("ledger serializes")
    }
}

/// Sidecar expectations: `<game stem>.solutions.json` next to a game
/// file supplies externally generated action sequences to replay
/// instead of searching.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SidecarSolution {
    pub level: usize,
    pub actions: Vec<u8>,
    /// Hex digest the replay's end state must match, if provided.
    pub expect_digest: Option<String>,
}

/// Compile every game, then per playable level either replay the
/// sidecar solution or search within the caps and replay the result.
/// Entry failures never abort the sweep.
pub fn validate_corpus(game_paths: &[PathBuf], limits: &SearchLimits) -> CorpusLedger {
    let results: Vec<Vec<LedgerRow>> = game_paths
        .par_iter()
        .map(|path| validate_game(path, limits))
        .collect();
    let mut rows = Vec::new();
    let mut counts = LedgerCounts::default();
    for game_rows in results {
        for row in game_rows {
            counts.bump(row.verdict);
            rows.push(row);
        }
    }
    CorpusLedger { rows, counts }
}

fn validate_game(path: &Path, limits: &SearchLimits) -> Vec<LedgerRow> {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            return vec![LedgerRow {
                game: name,
                level: None,
                verdict: Verdict::CompileError,
                detail: format!("unreadable: {e}"),
                env_steps: 0,
                solution_len: 0,
            }];
        }
    };
    let compiled = match crate::compile_source(&text) {
        Ok(c) => c,
        Err(diags) => {
            let first = diags.0.first().map(|d| d.to_string()).unwrap_or_default();
            return vec![LedgerRow {
                game: name,
                level: None,
                verdict: Verdict::CompileError,
                detail: first,
                env_steps: 0,
                solution_len: 0,
            }];
        }
    };
    let game = &compiled.game;

    let sidecars: Vec<SidecarSolution> = {
        let sidecar_path = path.with_extension("solutions.json");
        std::fs::read(&sidecar_path)
            .ok()
            .and_then(|bytes| serde_json::from_slice(&bytes).ok())
            .unwrap_or_default()
    };

    let engine_limits = EngineLimits { rng_seed: game.has_random.then_some(0), ..EngineLimits::default() };
    let mut rows = Vec::new();
    for level in crate::compile::playable_level_indices(game) {
        let row = if let Some(sidecar) = sidecars.iter().find(|s| s.level == level) {
            let expected = sidecar.expect_digest.as_deref().and_then(|h| u64::from_str_radix(h, 16).ok());
            match solver::replay(game, level, &sidecar.actions, expected, &engine_limits) {
                Ok(report) => LedgerRow {
                    game: name.clone(),
                    level: Some(level),
                    verdict: match report.status {
                        ReplayStatus::Success => Verdict::Success,
                        ReplayStatus::SolutionError => Verdict::SolutionError,
                        ReplayStatus::StateError => Verdict::StateError,
                        ReplayStatus::CompileError => Verdict::CompileError,
                        ReplayStatus::RuntimeError => Verdict::RuntimeError,
                    },
                    detail: "sidecar replay".into(),
                    env_steps: sidecar.actions.len() as u64,
                    solution_len: sidecar.actions.len(),
                },
                Err(e) => LedgerRow {
                    game: name.clone(),
                    level: Some(level),
                    verdict: Verdict::RuntimeError,
                    detail: e.to_string(),
                    env_steps: 0,
                    solution_len: sidecar.actions.len(),
                },
            }
        } else {
            validate_level(&name, game, level, limits, &engine_limits)
        };
        rows.push(row);
    }
    if rows.is_empty() {
        rows.push(LedgerRow {
            game: name,
            level: None,
            verdict: Verdict::Unvalidated,
            detail: "no playable levels".into(),
            env_steps: 0,
            solution_len: 0,
        });
    }
    rows
}

fn validate_level(
    name: &str,
    game: &GameDef,
    level: usize,
    limits: &SearchLimits,
    engine_limits: &EngineLimits,
) -> LedgerRow {
    let solution = match solver::solve_bfs(game, level, limits, engine_limits, None) {
        Ok(s) => s,
        Err(e) => {
            return LedgerRow {
                game: name.into(),
                level: Some(level),
                verdict: Verdict::RuntimeError,
                detail: e.to_string(),
                env_steps: 0,
                solution_len: 0,
            };
        }
    };
    if !solution.solved {
        return LedgerRow {
            game: name.into(),
            level: Some(level),
            verdict: Verdict::Unvalidated,
            detail: format!("budget exhausted (best score {})", solution.best_score),
            env_steps: solution.env_steps,
            solution_len: solution.actions.len(),
        };
    }
    match solver::replay(game, level, &solution.actions, Some(solution.terminal_digest), engine_limits) {
        Ok(report) => LedgerRow {
            game: name.into(),
            level: Some(level),
            verdict: match report.status {
                ReplayStatus::Success => Verdict::Success,
                ReplayStatus::SolutionError => Verdict::SolutionError,
                ReplayStatus::StateError => Verdict::StateError,
                ReplayStatus::CompileError => Verdict::CompileError,
                ReplayStatus::RuntimeError => Verdict::RuntimeError,
            },
            detail: "solved and replayed".into(),
            env_steps: solution.env_steps,
            solution_len: solution.actions.len(),
        },
        Err(e) => LedgerRow {
            game: name.into(),
            level: Some(level),
            verdict: Verdict::RuntimeError,
            detail: e.to_string(),
            env_steps: solution.env_steps,
            solution_len: solution.actions.len(),
        },
    }
}

/// Helper for loading solution files written by the CLI.
pub fn read_solution_file(path: &Path) -> Result<SolutionFile, String> {
    let bytes = std::fs::read(path).map_err(|e| e.to_string())?;
    serde_json::from_slice(&bytes).map_err(|e| e.to_string())
}

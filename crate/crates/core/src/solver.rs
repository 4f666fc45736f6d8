//! Breadth-first search over game states with digest deduplication,
//! budget limits, best-partial fallback, and replay verification.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::GameDef;
use crate::engine::{self, Action, EngineError, EngineLimits, GridState};
use crate::env::{win_distance, HeuristicConfig};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("game uses randomness; supply a seed to search it deterministically")]
    RandomGame,
}

#[derive(Debug, Clone)]
pub struct SearchLimits {
    pub max_env_steps: u64,
    pub timeout: Duration,
    pub dedupe: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_env_steps: 1_000_000, timeout: Duration::from_secs(60), dedupe: true }
    }
}

/// Result of a search: a winning action sequence, or the best-scoring
/// explored sequence when the budget runs out.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    /// Wire-coded actions (0=up, 1=down, 2=left, 3=right, 4=action).
    pub actions: Vec<u8>,
    pub solved: bool,
    /// Engine ticks executed during search.
    pub env_steps: u64,
    pub nodes_expanded: u64,
    /// Distance-to-win heuristic at the returned sequence's end state.
    pub best_score: f64,
    pub elapsed_s: f64,
    /// Digest of the end state, as produced by [`hash_state`].
    pub terminal_digest: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionFile {
    /// FNV-1a digest of the game source text, hex-encoded.
    pub game: String,
    pub level: usize,
    pub actions: Vec<u8>,
    pub solved: bool,
    pub env_steps: u64,
    pub nodes_expanded: u64,
    pub elapsed_s: f64,
    pub best_score: f64,
    /// Hex-encoded terminal state digest.
    pub terminal_digest: String,
}

impl Solution {
    pub fn to_file(&self, game_source: &str, level: usize) -> SolutionFile {
        SolutionFile {
            game: format!("{:016x}", source_digest(game_source)),
            level,
            actions: self.actions.clone(),
            solved: self.solved,
            env_steps: self.env_steps,
            nodes_expanded: self.nodes_expanded,
            elapsed_s: self.elapsed_s,
            best_score: self.best_score,
            terminal_digest: format!("{:016x}", self.terminal_digest),
        }
    }
}

/// FNV-1a digest of a source text, for tying solutions to game files.
pub fn source_digest(text: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Stable 64-bit state digest used for deduplication and replay
/// comparison. Forces are excluded: at tick boundaries quiescence holds
/// (all force planes zero), so presence planes identify the state.
pub fn hash_state(state: &GridState) -> u64 {
    state.digest()
}

/// The default search action set: the four directions, plus `action`
/// iff some compiled rule references the action qualifier and the
/// prelude does not disable it.
pub fn default_action_set(game: &GameDef) -> Vec<Action> {
    let mut actions = vec![Action::Up, Action::Down, Action::Left, Action::Right];
    if game.uses_action && !game.prelude.noaction {
        actions.push(Action::Act);
    }
    actions
}

struct Node {
    parent: u32,
    action: u8,
}

/// A frontier entry: search-tree node, packed presence planes, and the
/// checkpoint snapshot carried by the state.
type FrontierEntry = (u32, Arc<[u64]>, Option<Arc<[u64]>>);

const ROOT: u32 = u32::MAX;

fn path_to(nodes: &[Node], mut idx: u32) -> Vec<u8> {
    let mut actions = Vec::new();
    while idx != ROOT {
        let n = &nodes[idx as usize];
        actions.push(n.action);
        idx = n.parent;
    }
    actions.reverse();
    actions
}

fn depth_of(nodes: &[Node], mut idx: u32) -> usize {
    let mut d = 0;
    while idx != ROOT {
        d += 1;
        idx = nodes[idx as usize].parent;
    }
    d
}

/// FIFO search from the initial state; children are generated in fixed
/// action-code order, states are deduplicated by digest, and the first
/// winning state (shortest in action count) ends the search. On budget
/// exhaustion the best-scoring explored sequence is returned, ties
/// broken toward longer sequences.
pub fn solve_bfs(
    game: &GameDef,
    level_index: usize,
    limits: &SearchLimits,
    engine_limits: &EngineLimits,
    action_set: Option<&[Action]>,
) -> Result<Solution, SolverError> {
    if game.has_random && engine_limits.rng_seed.is_none() {
        return Err(SolverError::RandomGame);
    }
    let start = Instant::now();
    let actions = match action_set {
        Some(a) => a.to_vec(),
        None => default_action_set(game),
    };

    let (initial, outcome) = engine::init_level(game, level_index, engine_limits)?;
    let heuristic = HeuristicConfig::default();

    let mut env_steps: u64 = 0;
    let mut nodes_expanded: u64 = 0;
    let mut nodes: Vec<Node> = Vec::new();
    let mut visited: HashSet<u64> = HashSet::new();
    let mut frontier: VecDeque<FrontierEntry> = VecDeque::new();

    let init_digest = hash_state(&initial);
    if outcome.won {
        return Ok(Solution {
            actions: Vec::new(),
            solved: true,
            env_steps: 0,
            nodes_expanded: 0,
            best_score: 0.0,
            elapsed_s: start.elapsed().as_secs_f64(),
            terminal_digest: init_digest,
        });
    }
    visited.insert(init_digest);
    frontier.push_back((ROOT, initial.snapshot_presence(), initial.checkpoint.clone()));

    let mut best_node: u32 = ROOT;
    let mut best_score = win_distance(game, &initial, &heuristic);
    let mut best_depth = 0usize;
    let mut best_digest = init_digest;

    let mut template = initial.clone();

    'search: while let Some((node_idx, packed, checkpoint)) = frontier.pop_front() {
        template.restore_presence(&packed);
        template.checkpoint = checkpoint;
        nodes_expanded += 1;

        for &action in &actions {
            if env_steps >= limits.max_env_steps
                || (env_steps.is_multiple_of(1024) && start.elapsed() >= limits.timeout)
            {
                break 'search;
            }
            env_steps += 1;
            let (child, outcome) = engine::tick(game, &template, action, engine_limits)?;
            let digest = hash_state(&child);
            nodes.push(Node { parent: node_idx, action: action.code() });
            let child_idx = (nodes.len() - 1) as u32;

            if outcome.won {
                let path = path_to(&nodes, child_idx);
                return Ok(Solution {
                    actions: path,
                    solved: true,
                    env_steps,
                    nodes_expanded,
                    best_score: 0.0,
                    elapsed_s: start.elapsed().as_secs_f64(),
                    terminal_digest: digest,
                });
            }

            if limits.dedupe && !visited.insert(digest) {
                nodes.pop();
                continue;
            }

            let score = win_distance(game, &child, &heuristic);
            let depth = depth_of(&nodes, child_idx);
            if score < best_score || (score == best_score && depth > best_depth) {
                best_score = score;
                best_depth = depth;
                best_node = child_idx;
                best_digest = digest;
            }
            frontier.push_back((child_idx, child.snapshot_presence(), child.checkpoint.clone()));
        }
    }

    Ok(Solution {
        actions: path_to(&nodes, best_node),
        solved: false,
        env_steps,
        nodes_expanded,
        best_score,
        elapsed_s: start.elapsed().as_secs_f64(),
        terminal_digest: best_digest,
    })
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayStatus {
    Success,
    CompileError,
    RuntimeError,
    SolutionError,
    StateError,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReplayReport {
    pub final_digest: u64,
    pub won: bool,
    /// First step index where supplied expectations diverge.
    pub divergence_step: Option<usize>,
    pub messages: Vec<String>,
    pub status: ReplayStatus,
}

/// Re-execute an action sequence from the level's initial state,
/// checking the final digest against an expectation when supplied.
/// Execution stops at the first winning tick.
pub fn replay(
    game: &GameDef,
    level_index: usize,
    actions: &[u8],
    expected_digest: Option<u64>,
    engine_limits: &EngineLimits,
) -> Result<ReplayReport, SolverError> {
    replay_with_trajectory(game, level_index, actions, expected_digest, None, engine_limits)
}

/// Like [`replay`], with optional per-step digests for divergence
/// localization.
pub fn replay_with_trajectory(
    game: &GameDef,
    level_index: usize,
    actions: &[u8],
    expected_digest: Option<u64>,
    expected_steps: Option<&[u64]>,
    engine_limits: &EngineLimits,
) -> Result<ReplayReport, SolverError> {
    let (mut state, outcome) = engine::init_level(game, level_index, engine_limits)?;
    let mut messages = outcome.messages;
    let mut won = outcome.won;
    let mut divergence_step = None;

    for (i, &code) in actions.iter().enumerate() {
        if won {
            break;
        }
        let action = Action::from_code(code).map_err(SolverError::Engine)?;
        let (next, mut o) = engine::tick(game, &state, action, engine_limits)?;
        state = next;
        messages.append(&mut o.messages);
        won = o.won;
        if let Some(steps) = expected_steps {
            if divergence_step.is_none() && steps.get(i).is_some_and(|&d| d != hash_state(&state)) {
                divergence_step = Some(i);
            }
        }
    }

    let final_digest = hash_state(&state);
    if divergence_step.is_none() {
        if let Some(expected) = expected_digest {
            if expected != final_digest {
                divergence_step = Some(actions.len());
            }
        }
    }
    let status = if !won {
        ReplayStatus::SolutionError
    } else if divergence_step.is_some() {
        ReplayStatus::StateError
    } else {
        ReplayStatus::Success
    };
    Ok(ReplayReport { final_digest, won, divergence_step, messages, status })
}

impl ReplayReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "status": self.status,
            "won": self.won,
            "final_digest": format!("{:016x}", self.final_digest),
            "divergence_step": self.divergence_step,
            "messages": self.messages,
        })
    }
}

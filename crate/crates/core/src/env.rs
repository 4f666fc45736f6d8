//! Agent-facing episode API: multihot observations, distance-to-win
//! reward shaping, and termination bookkeeping.

use serde::{Deserialize, Serialize};

use crate::compile::{GameDef, ObjectId, WinKind};
use crate::engine::{self, Action, EngineError, EngineLimits, GridState, StepOutcome, FORCE_PLANES};

/// Distance-to-win heuristic settings.
#[derive(Debug, Clone)]
pub struct HeuristicConfig {
    pub include_player_term: bool,
    /// Cost charged when a condition has no satisfying candidate;
    /// defaults to `width + height` of the grid at evaluation time.
    pub unreachable_penalty: Option<f64>,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig { include_player_term: true, unreachable_penalty: None }
    }
}

#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub heuristic: HeuristicConfig,
    /// Episode step cap.
    pub horizon: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { heuristic: HeuristicConfig::default(), horizon: 1000 }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("episode is done; call reset")]
    StepAfterDone,
}

use thiserror::Error;

/// Episode state: a value, independent per episode.
#[derive(Debug, Clone)]
pub struct EnvState {
    pub grid: GridState,
    /// Always equals `win_distance(grid)`.
    pub score: f64,
    pub steps: usize,
    pub done: bool,
    pub won: bool,
}

/// Boolean planes of shape `(objects + 5×layers + 1) × height × width`:
/// presence planes in object-id order, then per-layer force planes
/// (up, down, left, right, action), then the last-input plane. Bits are
/// packed row-major LSB-first in 64-bit words, bit-for-bit equal to the
/// engine's planes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub width: u16,
    pub height: u16,
    pub num_objects: u16,
    pub num_layers: u16,
    pub planes: Vec<u64>,
}

impl Observation {
    pub fn from_state(state: &GridState) -> Observation {
        let wpp = state.words_per_plane();
        let mut planes =
            Vec::with_capacity(wpp * (state.num_objects() + FORCE_PLANES * state.num_layers() + 1));
        planes.extend_from_slice(state.presence_words());
        for layer in 0..state.num_layers() as u16 {
            for force in 0..FORCE_PLANES {
                planes.extend_from_slice(state.force_plane(layer, force));
            }
        }
        planes.extend_from_slice(state.last_input_plane());
        Observation {
            width: state.width,
            height: state.height,
            num_objects: state.num_objects() as u16,
            num_layers: state.num_layers() as u16,
            planes,
        }
    }

    pub fn plane_count(&self) -> usize {
        self.num_objects as usize + FORCE_PLANES * self.num_layers as usize + 1
    }

    /// Rebuild a grid state from the observation planes. The checkpoint
    /// snapshot is reseeded from the reconstructed presence planes.
    pub fn to_state(&self, game: &GameDef) -> GridState {
        let mut state = GridState::empty(game, self.width as usize, self.height as usize);
        state.copy_planes_from(&self.planes);
        state.checkpoint = Some(state.snapshot_presence());
        state
    }

    /// Flat binary export: one byte (0/1) per bit, plane-major, then
    /// row-major within each plane.
    pub fn to_bytes(&self) -> Vec<u8> {
        let cells = self.width as usize * self.height as usize;
        let wpp = cells.div_ceil(64).max(1);
        let mut out = Vec::with_capacity(self.plane_count() * cells);
        for p in 0..self.plane_count() {
            let plane = &self.planes[p * wpp..(p + 1) * wpp];
            for cell in 0..cells {
                out.push(((plane[cell >> 6] >> (cell & 63)) & 1) as u8);
            }
        }
        out
    }

    /// JSON debug form: plane names and set-bit positions.
    pub fn to_json(&self, game: &GameDef) -> serde_json::Value {
        let cells = self.width as usize * self.height as usize;
        let wpp = cells.div_ceil(64).max(1);
        let mut planes = Vec::new();
        let name_of = |p: usize| -> String {
            let n = self.num_objects as usize;
            if p < n {
                return game.objects.name_of(p as ObjectId).to_string();
            }
            let f = p - n;
            if f < FORCE_PLANES * self.num_layers as usize {
                let dir = ["up", "down", "left", "right", "action"][f % FORCE_PLANES];
                return format!("layer{}_{}", f / FORCE_PLANES, dir);
            }
            "last_input".to_string()
        };
        for p in 0..self.plane_count() {
            let plane = &self.planes[p * wpp..(p + 1) * wpp];
            let mut set = Vec::new();
            for cell in 0..cells {
                if (plane[cell >> 6] >> (cell & 63)) & 1 == 1 {
                    set.push([cell / self.width as usize, cell % self.width as usize]);
                }
            }
            planes.push(serde_json::json!({ "plane": name_of(p), "cells": set }));
        }
        serde_json::json!({
            "width": self.width,
            "height": self.height,
            "planes": planes,
        })
    }
}

fn manhattan(a: (usize, usize), b: (usize, usize)) -> f64 {
    (a.0.abs_diff(b.0) + a.1.abs_diff(b.1)) as f64
}

fn min_dist(from: (usize, usize), to: &[(usize, usize)]) -> Option<f64> {
    to.iter().map(|&t| manhattan(from, t)).min_by(|a, b| a.total_cmp(b))
}

/// Scalar distance-to-win over the game's win conditions: the sum of
/// per-condition costs plus (optionally) the Manhattan distance from
/// the nearest player object to the nearest cell participating in an
/// unsatisfied on-condition. Walls are ignored. Zero exactly when the
/// win conditions hold (for games winnable via conditions).
pub fn win_distance(game: &GameDef, state: &GridState, cfg: &HeuristicConfig) -> f64 {
    let penalty = cfg.unreachable_penalty.unwrap_or((state.width + state.height) as f64);
    let mut total = 0.0;
    let mut participants: Vec<(usize, usize)> = Vec::new();

    for cond in &game.win_conditions {
        let a_pos = state.positions_of(&cond.a);
        match cond.kind {
            WinKind::AllOn => {
                let b = cond.b.as_deref().unwrap_or(&[]);
                let b_pos = state.positions_of(b);
                let covered = |p: &(usize, usize)| b_pos.contains(p);
                for &a in a_pos.iter().filter(|p| !covered(p)) {
                    total += min_dist(a, &b_pos).unwrap_or(penalty);
                    participants.push(a);
                }
                if a_pos.iter().any(|p| !covered(p)) {
                    for &b in b_pos.iter().filter(|p| !a_pos.contains(p)) {
                        participants.push(b);
                    }
                }
            }
            WinKind::SomeOn => {
                let b = cond.b.as_deref().unwrap_or(&[]);
                let b_pos = state.positions_of(b);
                let satisfied = a_pos.iter().any(|p| b_pos.contains(p));
                if !satisfied {
                    if a_pos.is_empty() || b_pos.is_empty() {
                        total += penalty;
                    } else {
                        let best = a_pos
                            .iter()
                            .flat_map(|&a| b_pos.iter().map(move |&b| manhattan(a, b)))
                            .min_by(|a, b| a.total_cmp(b))
                            .unwrap();
                        total += best;
                    }
                    participants.extend(a_pos.iter().copied());
                    participants.extend(b_pos.iter().copied());
                }
            }
            WinKind::NoOn => {
                let b = cond.b.as_deref().unwrap_or(&[]);
                let b_pos = state.positions_of(b);
                for &a in a_pos.iter().filter(|p| b_pos.contains(p)) {
                    total += 1.0;
                    participants.push(a);
                }
            }
            WinKind::Some => {
                if a_pos.is_empty() {
                    total += penalty;
                }
            }
            WinKind::None => {
                total += a_pos.len() as f64;
            }
        }
    }

    if cfg.include_player_term && !participants.is_empty() {
        let players = state.positions_of(&game.player_ids);
        let term = players
            .iter()
            .filter_map(|&p| min_dist(p, &participants))
            .min_by(|a, b| a.total_cmp(b))
            .unwrap_or(0.0);
        total += term;
    }
    total
}

/// Start an episode on a playable level.
pub fn env_reset(
    game: &GameDef,
    level_index: usize,
    seed: Option<u64>,
    limits: &EngineLimits,
    cfg: &EnvConfig,
) -> Result<(EnvState, Observation), EnvError> {
    let mut limits = limits.clone();
    if seed.is_some() {
        limits.rng_seed = seed;
    }
    let (grid, outcome) = engine::init_level(game, level_index, &limits)?;
    let score = win_distance(game, &grid, &cfg.heuristic);
    let obs = Observation::from_state(&grid);
    let env = EnvState { grid, score, steps: 0, done: outcome.won, won: outcome.won };
    Ok((env, obs))
}

/// Advance one step; reward is the decrease in distance-to-win.
pub fn env_step(
    game: &GameDef,
    env: &EnvState,
    action: Action,
    limits: &EngineLimits,
    cfg: &EnvConfig,
) -> Result<(EnvState, Observation, f64, bool, StepOutcome), EnvError> {
    if env.done {
        return Err(EnvError::StepAfterDone);
    }
    let (grid, outcome) = engine::tick(game, &env.grid, action, limits)?;
    let score = win_distance(game, &grid, &cfg.heuristic);
    let reward = env.score - score;
    let steps = env.steps + 1;
    let done = outcome.won || steps >= cfg.horizon;
    let obs = Observation::from_state(&grid);
    let next = EnvState { grid, score, steps, done, won: outcome.won };
    Ok((next, obs, reward, done, outcome))
}

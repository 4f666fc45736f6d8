//! Deterministic tick execution over bitplane level states.
//!
//! A level is a stack of boolean planes: one presence plane per atomic
//! object, five force planes (up/down/left/right/action) per collision
//! layer, and one plane marking cells affected by the last input. A
//! tick stamps the input force onto player objects, runs every rule
//! block (groups apply to fixpoint, loop blocks repeat until a full
//! pass is ineffective), resolves movement in scan order, runs late
//! rules, honors queued commands, and evaluates win conditions.

pub mod apply;

use std::sync::Arc;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compile::{Block, Command, Dir, GameDef, LevelDef, ObjectId, WinCondition, WinKind};

pub const FORCE_PLANES: usize = 5;
pub const ACTION_MASK: u8 = 1 << 4;
pub const DIR_MASK: u8 = 0b1111;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("level index {0} is out of range")]
    LevelOutOfRange(usize),
    #[error("level {0} is a message entry, not a playable level")]
    MessageLevel(usize),
    #[error("rule group (line {line}) exceeded {cap} applications; the group likely loops forever")]
    GroupCapExceeded { line: usize, cap: u32 },
    #[error("loop block exceeded {cap} iterations without reaching a fixpoint")]
    LoopCapExceeded { cap: u32 },
    #[error("`again` exceeded {cap} re-ticks without quiescing")]
    AgainCapExceeded { cap: u32 },
    #[error("game uses `random`/`randomdir` but no rng seed was supplied")]
    RandomWithoutSeed,
    #[error("malformed action code {0}")]
    BadActionCode(u8),
    #[error("engine defect: {0}")]
    Internal(String),
}

/// Player input for one tick. Wire codes are fixed: 0=up, 1=down,
/// 2=left, 3=right, 4=action, 5=none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
    Act = 4,
    None = 5,
}

pub const ALL_ACTIONS: [Action; 5] = [Action::Up, Action::Down, Action::Left, Action::Right, Action::Act];

impl Action {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Action, EngineError> {
        Ok(match code {
            0 => Action::Up,
            1 => Action::Down,
            2 => Action::Left,
            3 => Action::Right,
            4 => Action::Act,
            5 => Action::None,
            other => return Err(EngineError::BadActionCode(other)),
        })
    }

    pub fn dir(self) -> Option<Dir> {
        match self {
            Action::Up => Some(Dir::Up),
            Action::Down => Some(Dir::Down),
            Action::Left => Some(Dir::Left),
            Action::Right => Some(Dir::Right),
            _ => None,
        }
    }
}

/// Loop-protection caps and the optional rng seed.
#[derive(Debug, Clone)]
pub struct EngineLimits {
    pub max_rule_applications_per_group: u32,
    pub max_group_sweeps_per_block: u32,
    pub max_loop_iterations: u32,
    pub max_again_ticks: u32,
    pub rng_seed: Option<u64>,
    /// Record per-application rule traces in [`StepOutcome`].
    pub collect_rule_trace: bool,
}

impl Default for EngineLimits {
    fn default() -> Self {
        EngineLimits {
            max_rule_applications_per_group: 10_000,
            max_group_sweeps_per_block: 10_000,
            max_loop_iterations: 200,
            max_again_ticks: 1000,
            rng_seed: None,
            collect_rule_trace: false,
        }
    }
}

/// One rule application, for debugging traces.
#[derive(Debug, Clone, Serialize)]
pub struct TraceEntry {
    /// Block index, or `None` for late groups.
    pub block: Option<usize>,
    pub group: usize,
    pub rule: usize,
    pub direction: Dir,
    pub source_line: usize,
    /// Anchor cell (row, col) of the first kernel.
    pub cell: (u16, u16),
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StepOutcome {
    pub won: bool,
    pub restarted: bool,
    pub cancelled: bool,
    /// Presence planes differ from the pre-tick state.
    pub changed: bool,
    pub messages: Vec<String>,
    pub again_ticks_used: u32,
    pub rule_trace: Option<Vec<TraceEntry>>,
}

/// The mutable level state: a value type — cloning yields an
/// independent state sharing nothing but the immutable game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridState {
    pub width: u16,
    pub height: u16,
    words_per_plane: u32,
    num_objects: u16,
    num_layers: u16,
    /// `num_objects` planes of `words_per_plane` words each.
    presence: Vec<u64>,
    /// `num_layers * 5` planes (up, down, left, right, action).
    forces: Vec<u64>,
    last_input: Vec<u64>,
    /// Snapshot of presence planes restored by `restart`; seeded with
    /// the initial level and replaced by the `checkpoint` command.
    pub checkpoint: Option<Arc<[u64]>>,
}

impl GridState {
    fn blank(game: &GameDef, width: usize, height: usize) -> GridState {
        let cells = width * height;
        let wpp = cells.div_ceil(64).max(1);
        let num_objects = game.objects.len();
        let num_layers = game.layers.layers.len();
        GridState {
            width: width as u16,
            height: height as u16,
            words_per_plane: wpp as u32,
            num_objects: num_objects as u16,
            num_layers: num_layers as u16,
            presence: vec![0; num_objects * wpp],
            forces: vec![0; num_layers * FORCE_PLANES * wpp],
            last_input: vec![0; wpp],
            checkpoint: None,
        }
    }

    /// An all-empty state of the given shape (no background placed).
    pub fn empty(game: &GameDef, width: usize, height: usize) -> GridState {
        GridState::blank(game, width, height)
    }

    /// Overwrite all planes from a flat observation layout: presence,
    /// then per-layer forces, then last-input.
    pub fn copy_planes_from(&mut self, planes: &[u64]) {
        let wpp = self.words_per_plane as usize;
        let n = self.num_objects as usize * wpp;
        let f = self.num_layers as usize * FORCE_PLANES * wpp;
        self.presence.copy_from_slice(&planes[..n]);
        self.forces.copy_from_slice(&planes[n..n + f]);
        self.last_input.copy_from_slice(&planes[n + f..n + f + wpp]);
    }

    pub fn cells(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn words_per_plane(&self) -> usize {
        self.words_per_plane as usize
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects as usize
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers as usize
    }

    #[inline]
    pub fn cell_index(&self, row: usize, col: usize) -> usize {
        row * self.width as usize + col
    }

    #[inline]
    pub fn presence_plane(&self, object: ObjectId) -> &[u64] {
        let wpp = self.words_per_plane as usize;
        &self.presence[object as usize * wpp..(object as usize + 1) * wpp]
    }

    pub fn presence_words(&self) -> &[u64] {
        &self.presence
    }

    pub fn last_input_plane(&self) -> &[u64] {
        &self.last_input
    }

    #[inline]
    pub fn has_object(&self, object: ObjectId, cell: usize) -> bool {
        let w = self.words_per_plane as usize;
        let plane = object as usize * w;
        (self.presence[plane + (cell >> 6)] >> (cell & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_object(&mut self, object: ObjectId, cell: usize, present: bool) {
        let w = self.words_per_plane as usize;
        let word = object as usize * w + (cell >> 6);
        let bit = 1u64 << (cell & 63);
        if present {
            self.presence[word] |= bit;
        } else {
            self.presence[word] &= !bit;
        }
    }

    /// The five force bits for a layer at a cell, as a bitmask
    /// (bit 0..3 = up/down/left/right, bit 4 = action).
    #[inline]
    pub fn force_bits(&self, layer: u16, cell: usize) -> u8 {
        let w = self.words_per_plane as usize;
        let base = layer as usize * FORCE_PLANES * w;
        let word = cell >> 6;
        let bit = cell & 63;
        let mut mask = 0u8;
        for f in 0..FORCE_PLANES {
            mask |= (((self.forces[base + f * w + word] >> bit) & 1) as u8) << f;
        }
        mask
    }

    /// Overwrite the five force bits for a layer at a cell.
    #[inline]
    pub fn set_force_bits(&mut self, layer: u16, cell: usize, mask: u8) {
        let w = self.words_per_plane as usize;
        let base = layer as usize * FORCE_PLANES * w;
        let word = cell >> 6;
        let bit = 1u64 << (cell & 63);
        for f in 0..FORCE_PLANES {
            if (mask >> f) & 1 == 1 {
                self.forces[base + f * w + word] |= bit;
            } else {
                self.forces[base + f * w + word] &= !bit;
            }
        }
    }

    #[inline]
    fn or_force_bit(&mut self, layer: u16, cell: usize, force: usize) {
        let w = self.words_per_plane as usize;
        let base = layer as usize * FORCE_PLANES * w;
        self.forces[base + force * w + (cell >> 6)] |= 1u64 << (cell & 63);
    }

    pub fn force_plane(&self, layer: u16, force: usize) -> &[u64] {
        let w = self.words_per_plane as usize;
        let base = (layer as usize * FORCE_PLANES + force) * w;
        &self.forces[base..base + w]
    }

    pub fn clear_forces(&mut self) {
        self.forces.fill(0);
    }

    pub fn forces_are_zero(&self) -> bool {
        self.forces.iter().all(|&w| w == 0)
    }

    /// First member of `members` present at the cell.
    #[inline]
    pub fn first_member_at(&self, members: &[ObjectId], cell: usize) -> Option<ObjectId> {
        members.iter().copied().find(|&m| self.has_object(m, cell))
    }

    /// The object occupying `layer` at `cell`, if any.
    #[inline]
    pub fn occupant(&self, game: &GameDef, layer: u16, cell: usize) -> Option<ObjectId> {
        self.first_member_at(&game.layers.layers[layer as usize], cell)
    }

    pub fn presence_eq(&self, other: &GridState) -> bool {
        self.presence == other.presence
    }

    /// Stable 64-bit FNV-1a digest over (width, height, presence planes).
    ///
    /// Byte layout: width and height as little-endian u32, then each
    /// presence plane in object-id order, packed row-major LSB-first
    /// into 64-bit words emitted as little-endian bytes (trailing bits
    /// of the final word are zero).
    pub fn digest(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut absorb = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        absorb(&(self.width as u32).to_le_bytes());
        absorb(&(self.height as u32).to_le_bytes());
        for word in &self.presence {
            absorb(&word.to_le_bytes());
        }
        h
    }

    /// Positions `(row, col)` of every instance of any member object.
    pub fn positions_of(&self, members: &[ObjectId]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let width = self.width as usize;
        for cell in 0..self.cells() {
            if self.first_member_at(members, cell).is_some() {
                out.push((cell / width, cell % width));
            }
        }
        out
    }

    /// Restore presence planes from a packed snapshot (forces and
    /// last-input planes are zeroed).
    pub fn restore_presence(&mut self, snapshot: &[u64]) {
        self.presence.copy_from_slice(snapshot);
        self.forces.fill(0);
        self.last_input.fill(0);
    }

    pub fn snapshot_presence(&self) -> Arc<[u64]> {
        Arc::from(self.presence.as_slice())
    }

    /// Build a state from ASCII rows using the game's level glyphs plus
    /// extra `(glyph, object name)` mappings. Debugging/test aid.
    pub fn from_glyph_rows(
        game: &GameDef,
        rows: &[&str],
        extra: &[(char, &str)],
    ) -> Result<GridState, EngineError> {
        let height = rows.len();
        let width = rows.iter().map(|r| r.chars().count()).max().unwrap_or(0);
        let mut state = GridState::blank(game, width, height);
        for (r, row) in rows.iter().enumerate() {
            for (c, glyph) in row.chars().enumerate() {
                let cell = state.cell_index(r, c);
                state.set_object(game.background_id, cell, true);
                if let Some((_, name)) = extra.iter().find(|(g, _)| *g == glyph) {
                    let id = game
                        .objects
                        .id_of(name)
                        .ok_or_else(|| EngineError::Internal(format!("unknown object `{name}`")))?;
                    state.set_object(id, cell, true);
                    continue;
                }
                let folded = glyph.to_ascii_lowercase();
                match game.legend.glyphs.get(&folded) {
                    Some(entry) => {
                        for &m in &entry.members {
                            state.set_object(m, cell, true);
                        }
                    }
                    None => {
                        return Err(EngineError::Internal(format!("unknown glyph `{glyph}`")));
                    }
                }
            }
            // Pad short rows with background only.
            for c in row.chars().count()..width {
                let cell = state.cell_index(r, c);
                state.set_object(game.background_id, cell, true);
            }
        }
        state.checkpoint = Some(state.snapshot_presence());
        Ok(state)
    }

    /// Debug invariant: at most one object per collision layer per cell,
    /// and any force bit implies an occupant in that layer.
    pub fn check_layer_exclusivity(&self, game: &GameDef) -> Result<(), String> {
        for cell in 0..self.cells() {
            for (l, layer) in game.layers.layers.iter().enumerate() {
                let mut count = 0;
                for &m in layer {
                    if self.has_object(m, cell) {
                        count += 1;
                    }
                }
                if count > 1 {
                    return Err(format!("cell {cell} holds {count} objects of layer {l}"));
                }
                if count == 0 && self.force_bits(l as u16, cell) != 0 {
                    return Err(format!("cell {cell} has a force on unoccupied layer {l}"));
                }
            }
        }
        Ok(())
    }
}

/// Queued command effects of one tick.
#[derive(Debug, Default, Clone)]
pub(crate) struct CommandQueue {
    pub win: bool,
    pub cancel: bool,
    pub restart: bool,
    pub again: bool,
    pub checkpoint: bool,
    pub messages: Vec<String>,
}

impl CommandQueue {
    pub(crate) fn queue(&mut self, commands: &[Command]) {
        for c in commands {
            match c {
                Command::Win => self.win = true,
                Command::Cancel => self.cancel = true,
                Command::Restart => self.restart = true,
                Command::Again => self.again = true,
                Command::Checkpoint => self.checkpoint = true,
                Command::Message(m) => self.messages.push(m.clone()),
            }
        }
    }
}

/// Build the initial state for a playable level; if the prelude sets
/// `run_rules_on_level_start`, one input-free tick runs before return.
pub fn init_level(
    game: &GameDef,
    level_index: usize,
    limits: &EngineLimits,
) -> Result<(GridState, StepOutcome), EngineError> {
    if game.has_random && limits.rng_seed.is_none() {
        return Err(EngineError::RandomWithoutSeed);
    }
    let level = game.levels.get(level_index).ok_or(EngineError::LevelOutOfRange(level_index))?;
    let LevelDef::Grid { width, height, cells } = level else {
        return Err(EngineError::MessageLevel(level_index));
    };
    let mut state = GridState::blank(game, *width, *height);
    for (cell, ids) in cells.iter().enumerate() {
        for &id in ids {
            state.set_object(id, cell, true);
        }
    }
    state.checkpoint = Some(state.snapshot_presence());

    if game.prelude.run_rules_on_level_start {
        tick(game, &state, Action::None, limits)
    } else {
        Ok((state, StepOutcome::default()))
    }
}

/// Execute one input tick, including any `again` re-ticks.
pub fn tick(
    game: &GameDef,
    state: &GridState,
    input: Action,
    limits: &EngineLimits,
) -> Result<(GridState, StepOutcome), EngineError> {
    if game.has_random && limits.rng_seed.is_none() {
        return Err(EngineError::RandomWithoutSeed);
    }
    let (mut current, mut info) = tick_once(game, state, input, limits)?;
    let mut outcome = StepOutcome {
        won: info.won,
        restarted: info.restarted,
        cancelled: info.cancelled,
        changed: false,
        messages: std::mem::take(&mut info.messages),
        again_ticks_used: 0,
        rule_trace: info.trace.take(),
    };

    while info.again && info.changed && !outcome.won && !info.cancelled && !info.restarted {
        if outcome.again_ticks_used >= limits.max_again_ticks {
            return Err(EngineError::AgainCapExceeded { cap: limits.max_again_ticks });
        }
        let (next, mut ninfo) = tick_once(game, &current, Action::None, limits)?;
        outcome.again_ticks_used += 1;
        outcome.messages.append(&mut ninfo.messages);
        if let (Some(trace), Some(more)) = (outcome.rule_trace.as_mut(), ninfo.trace.take()) {
            trace.extend(more);
        }
        outcome.won |= ninfo.won;
        outcome.restarted |= ninfo.restarted;
        if ninfo.cancelled {
            // A cancelled re-tick keeps the chain's progress so far.
            break;
        }
        current = next;
        info = ninfo;
    }

    outcome.changed = !state.presence_eq(&current);
    Ok((current, outcome))
}

struct TickInfo {
    won: bool,
    restarted: bool,
    cancelled: bool,
    /// Presence changed relative to the tick's own input state.
    changed: bool,
    again: bool,
    messages: Vec<String>,
    trace: Option<Vec<TraceEntry>>,
}

fn tick_once(
    game: &GameDef,
    pre: &GridState,
    input: Action,
    limits: &EngineLimits,
) -> Result<(GridState, TickInfo), EngineError> {
    let mut state = pre.clone();
    let mut queue = CommandQueue::default();
    let mut trace = if limits.collect_rule_trace { Some(Vec::new()) } else { None };

    // Randomness is derived from (seed, state, input) so ticks stay pure.
    let mut rng = limits
        .rng_seed
        .map(|seed| ChaCha8Rng::seed_from_u64(seed ^ pre.digest().rotate_left(17) ^ input.code() as u64));

    stamp_input(game, &mut state, input);

    // Rule blocks: a plain block is one pass over its groups (each group
    // runs to fixpoint); a loop block repeats until a pass is ineffective.
    for (block_idx, block) in game.blocks.iter().enumerate() {
        match block {
            Block::Plain(groups) => {
                for (gi, group) in groups.iter().enumerate() {
                    apply::apply_group_mut(
                        game,
                        &mut state,
                        group,
                        limits,
                        &mut queue,
                        &mut rng,
                        &mut trace,
                        Some(block_idx),
                        gi,
                    )?;
                }
            }
            Block::Loop(groups) => {
                let mut iterations = 0u32;
                loop {
                    let mut pass_changed = false;
                    for (gi, group) in groups.iter().enumerate() {
                        pass_changed |= apply::apply_group_mut(
                            game,
                            &mut state,
                            group,
                            limits,
                            &mut queue,
                            &mut rng,
                            &mut trace,
                            Some(block_idx),
                            gi,
                        )?;
                    }
                    if !pass_changed {
                        break;
                    }
                    iterations += 1;
                    if iterations >= limits.max_loop_iterations || iterations >= limits.max_group_sweeps_per_block {
                        return Err(EngineError::LoopCapExceeded {
                            cap: limits.max_loop_iterations.min(limits.max_group_sweeps_per_block),
                        });
                    }
                }
            }
        }
    }

    resolve_movement(game, &mut state);

    for (gi, group) in game.late_groups.iter().enumerate() {
        apply::apply_group_mut(game, &mut state, group, limits, &mut queue, &mut rng, &mut trace, None, gi)?;
    }

    // Command evaluation. Cancel discards the whole tick.
    if queue.cancel {
        let info = TickInfo {
            won: false,
            restarted: false,
            cancelled: true,
            changed: false,
            again: false,
            messages: queue.messages,
            trace,
        };
        return Ok((pre.clone(), info));
    }

    let mut won = false;
    let mut restarted = false;
    if queue.restart {
        let snapshot = state
            .checkpoint
            .clone()
            .ok_or_else(|| EngineError::Internal("restart with no checkpoint snapshot".into()))?;
        state.restore_presence(&snapshot);
        restarted = true;
    } else {
        if queue.checkpoint {
            state.checkpoint = Some(state.snapshot_presence());
        }
        won = queue.win;
    }

    state.clear_forces();
    if !won && !restarted {
        won = check_win(game, &state);
    }

    let info = TickInfo {
        won,
        restarted,
        cancelled: false,
        changed: !pre.presence_eq(&state),
        again: queue.again && !restarted,
        messages: queue.messages,
        trace,
    };
    Ok((state, info))
}

/// Stamp the input onto every cell holding a player-bound object, and
/// rewrite the last-input plane accordingly.
fn stamp_input(game: &GameDef, state: &mut GridState, input: Action) {
    state.last_input.fill(0);
    let force = match input {
        Action::None => return,
        Action::Act if game.prelude.noaction => return,
        Action::Act => 4usize,
        a => a.dir().expect("directional") as usize,
    };
    let wpp = state.words_per_plane as usize;
    for &player in &game.player_ids {
        let layer = game.layers.layer_of[player as usize];
        debug_assert_ne!(layer, crate::compile::NO_LAYER);
        for w in 0..wpp {
            let mut bits = state.presence[player as usize * wpp + w];
            state.last_input[w] |= bits;
            while bits != 0 {
                let cell = (w << 6) + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                state.or_force_bit(layer, cell, force);
            }
        }
    }
}

/// Move objects one tile along their directional force where the
/// destination layer cell is free, in row-major scan order and layer
/// declaration order, repeating until a full pass moves nothing.
pub fn resolve_movement(game: &GameDef, state: &mut GridState) -> bool {
    let width = state.width as usize;
    let height = state.height as usize;
    let wpp = state.words_per_plane as usize;
    let num_layers = state.num_layers as usize;
    let mut moved_any = false;

    loop {
        let mut moved = false;
        for w in 0..wpp {
            // Cells with any directional force on any layer.
            let mut bits = 0u64;
            for l in 0..num_layers {
                let base = l * FORCE_PLANES * wpp;
                for f in 0..4 {
                    bits |= state.forces[base + f * wpp + w];
                }
            }
            while bits != 0 {
                let cell = (w << 6) + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if cell >= width * height {
                    break;
                }
                for l in 0..num_layers as u16 {
                    let force = state.force_bits(l, cell) & DIR_MASK;
                    if force == 0 {
                        continue;
                    }
                    let dir = Dir::from_index(force.trailing_zeros() as u8);
                    let (dr, dc) = dir.delta();
                    let row = (cell / width) as i32 + dr;
                    let col = (cell % width) as i32 + dc;
                    if row < 0 || row >= height as i32 || col < 0 || col >= width as i32 {
                        continue;
                    }
                    let dest = row as usize * width + col as usize;
                    let Some(object) = state.occupant(game, l, cell) else {
                        continue;
                    };
                    if state.occupant(game, l, dest).is_some() {
                        continue;
                    }
                    state.set_object(object, cell, false);
                    state.set_object(object, dest, true);
                    state.set_force_bits(l, cell, 0);
                    moved = true;
                }
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    moved_any
}

/// Evaluate the conjunction of all win conditions; an empty list never
/// auto-wins.
pub fn check_win(game: &GameDef, state: &GridState) -> bool {
    if game.win_conditions.is_empty() {
        return false;
    }
    game.win_conditions.iter().all(|c| condition_holds(state, c))
}

fn condition_holds(state: &GridState, cond: &WinCondition) -> bool {
    let wpp = state.words_per_plane as usize;
    let union_word = |ids: &[ObjectId], w: usize| -> u64 {
        let mut bits = 0u64;
        for &id in ids {
            bits |= state.presence[id as usize * wpp + w];
        }
        bits
    };
    let b = cond.b.as_deref().unwrap_or(&[]);
    match cond.kind {
        WinKind::AllOn => (0..wpp).all(|w| union_word(&cond.a, w) & !union_word(b, w) == 0),
        WinKind::SomeOn => (0..wpp).any(|w| union_word(&cond.a, w) & union_word(b, w) != 0),
        WinKind::NoOn => (0..wpp).all(|w| union_word(&cond.a, w) & union_word(b, w) == 0),
        WinKind::Some => (0..wpp).any(|w| union_word(&cond.a, w) != 0),
        WinKind::None => (0..wpp).all(|w| union_word(&cond.a, w) == 0),
    }
}

/// Apply a single rule group to fixpoint. Exposed for fixpoint
/// idempotence checks; [`tick`] drives the full pipeline.
pub fn apply_rule_group(
    game: &GameDef,
    state: &GridState,
    group: &crate::compile::RuleGroup,
    limits: &EngineLimits,
) -> Result<(GridState, bool), EngineError> {
    let mut next = state.clone();
    let mut queue = CommandQueue::default();
    let mut rng = limits.rng_seed.map(ChaCha8Rng::seed_from_u64);
    let changed =
        apply::apply_group_mut(game, &mut next, group, limits, &mut queue, &mut rng, &mut None, None, 0)?;
    Ok((next, changed))
}

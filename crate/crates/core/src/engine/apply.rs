//! Rule group application: matching, binding, and projection.
//!
//! A group applies each of its rule variants to fixpoint in order,
//! re-sweeping the variants until a clean pass. Matches are searched in
//! row-major order over anchor cells (the position of a kernel's first
//! cell), restarting after every effective application. A match is
//! effective only when projecting the right side actually flips a
//! presence or force bit; because an ineffective projection writes
//! nothing, candidates are applied optimistically and the scan simply
//! moves on when nothing changed.
//!
//! Line-detector kernels try the least total gap first, growing the gap
//! only when no smaller spacing matches anywhere.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::compile::{Cell, CompiledRule, GameDef, ObjectId, Qualifier, RuleGroup};
use crate::engine::{CommandQueue, EngineError, EngineLimits, GridState, TraceEntry, ACTION_MASK, DIR_MASK};

const NO_DIR: u8 = 255;
const ELLIPSIS_POS: u32 = u32::MAX;

#[derive(Default)]
struct Scratch {
    /// Per kernel-cell matched positions (cell index, or ELLIPSIS_POS).
    positions: Vec<u32>,
    /// Per left entry: (matched member, matched direction or NO_DIR).
    bindings: Vec<(ObjectId, u8)>,
    /// Start offsets into `positions`/`bindings` per kernel.
    pos_starts: Vec<usize>,
    bind_starts: Vec<usize>,
    /// Candidate anchors per kernel, in row-major order.
    candidates: Vec<Vec<u32>>,
    /// Per-cell projection intents.
    obj_intents: Vec<(ObjectId, bool)>,
    force_intents: Vec<(u16, u8)>,
    trace_width: u32,
}

/// A fully resolved match, recorded when collecting (random groups).
struct SavedMatch {
    rule: usize,
    positions: Vec<u32>,
    bindings: Vec<(ObjectId, u8)>,
}

enum Mode {
    /// Apply the first effective match in place.
    ApplyFirst,
    /// Stop at the first bare match without projecting (command-only).
    MatchOnly,
    /// Collect every effective match without mutating the state.
    Collect,
}

/// Apply one rule group to fixpoint against `state`. Returns whether
/// anything changed. Commands queue once per sweep in which their rule
/// applied.
#[allow(clippy::too_many_arguments)]
pub(crate) fn apply_group_mut(
    game: &GameDef,
    state: &mut GridState,
    group: &RuleGroup,
    limits: &EngineLimits,
    queue: &mut CommandQueue,
    rng: &mut Option<ChaCha8Rng>,
    trace: &mut Option<Vec<TraceEntry>>,
    block_idx: Option<usize>,
    group_idx: usize,
) -> Result<bool, EngineError> {
    let mut scratch = Scratch::default();
    if group.is_random {
        return apply_random_group(game, state, group, queue, rng, trace, block_idx, group_idx, &mut scratch);
    }

    let cap = limits.max_rule_applications_per_group;
    let mut apps: u32 = 0;
    let mut group_changed = false;

    loop {
        let mut sweep_changed = false;
        for (ri, rule) in group.rules.iter().enumerate() {
            if rule.rhs.is_none() {
                // Command-only rules fire on a bare match.
                if find_match(game, state, rule, rng, Mode::MatchOnly, &mut scratch, None)?.is_some() {
                    queue.queue(&rule.commands);
                    push_trace(trace, block_idx, group_idx, ri, rule, &scratch);
                }
                continue;
            }
            let mut rule_applied = false;
            while find_match(game, state, rule, rng, Mode::ApplyFirst, &mut scratch, None)?.is_some() {
                rule_applied = true;
                sweep_changed = true;
                apps += 1;
                if apps > cap {
                    return Err(EngineError::GroupCapExceeded { line: rule.source_line, cap });
                }
                push_trace(trace, block_idx, group_idx, ri, rule, &scratch);
            }
            if rule_applied {
                queue.queue(&rule.commands);
            }
        }
        if !sweep_changed {
            break;
        }
        group_changed = true;
    }
    Ok(group_changed)
}

/// A random group runs a single sweep: collect every effective match
/// across all variants, apply exactly one chosen uniformly.
#[allow(clippy::too_many_arguments)]
fn apply_random_group(
    game: &GameDef,
    state: &mut GridState,
    group: &RuleGroup,
    queue: &mut CommandQueue,
    rng: &mut Option<ChaCha8Rng>,
    trace: &mut Option<Vec<TraceEntry>>,
    block_idx: Option<usize>,
    group_idx: usize,
    scratch: &mut Scratch,
) -> Result<bool, EngineError> {
    let mut collected: Vec<SavedMatch> = Vec::new();
    for (ri, rule) in group.rules.iter().enumerate() {
        if rule.rhs.is_none() {
            continue;
        }
        let mut sink = Vec::new();
        find_match(game, state, rule, rng, Mode::Collect, scratch, Some(&mut sink))?;
        for mut m in sink {
            m.rule = ri;
            collected.push(m);
        }
    }
    if collected.is_empty() {
        return Ok(false);
    }
    let r = rng.as_mut().ok_or(EngineError::RandomWithoutSeed)?;
    let pick = &collected[r.gen_range(0..collected.len())];
    let rule = &group.rules[pick.rule];

    scratch.positions.clear();
    scratch.bindings.clear();
    scratch.positions.extend_from_slice(&pick.positions);
    scratch.bindings.extend_from_slice(&pick.bindings);
    rebuild_starts(rule, scratch);
    apply_at(game, state, rule, scratch, rng)?;
    queue.queue(&rule.commands);
    push_trace(trace, block_idx, group_idx, pick.rule, rule, scratch);
    Ok(true)
}

/// Recompute per-kernel start offsets from a flat saved match.
fn rebuild_starts(rule: &CompiledRule, scratch: &mut Scratch) {
    scratch.pos_starts.clear();
    scratch.bind_starts.clear();
    let mut pos = 0usize;
    let mut bind = 0usize;
    for kernel in &rule.lhs {
        scratch.pos_starts.push(pos);
        scratch.bind_starts.push(bind);
        pos += kernel.len();
        bind += kernel
            .iter()
            .map(|c| match c {
                Cell::Patterns(es) => es.len(),
                Cell::Ellipsis => 0,
            })
            .sum::<usize>();
    }
}

fn push_trace(
    trace: &mut Option<Vec<TraceEntry>>,
    block_idx: Option<usize>,
    group_idx: usize,
    rule_idx: usize,
    rule: &CompiledRule,
    scratch: &Scratch,
) {
    let Some(trace) = trace.as_mut() else { return };
    let anchor = scratch.positions.first().copied().unwrap_or(0);
    let width = scratch.trace_width.max(1);
    trace.push(TraceEntry {
        block: block_idx,
        group: group_idx,
        rule: rule_idx,
        direction: rule.direction,
        source_line: rule.source_line,
        cell: ((anchor / width) as u16, (anchor % width) as u16),
    });
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

/// Search for matches of `rule` per `mode`. Returns `Some(())` when a
/// match was found (and, for `ApplyFirst`, effectively applied).
fn find_match(
    game: &GameDef,
    state: &mut GridState,
    rule: &CompiledRule,
    rng: &mut Option<ChaCha8Rng>,
    mode: Mode,
    scratch: &mut Scratch,
    mut collect: Option<&mut Vec<SavedMatch>>,
) -> Result<Option<()>, EngineError> {
    scratch.trace_width = state.width as u32;
    build_candidates(state, rule, scratch);
    scratch.positions.clear();
    scratch.bindings.clear();
    scratch.pos_starts.clear();
    scratch.bind_starts.clear();

    let found = rec_kernels(game, state, rule, 0, &mode, rng, scratch, &mut collect)?;
    Ok(if found { Some(()) } else { None })
}

/// Depth-first over kernels; at the leaf every kernel is matched and the
/// mode decides what happens.
#[allow(clippy::too_many_arguments)]
fn rec_kernels(
    game: &GameDef,
    state: &mut GridState,
    rule: &CompiledRule,
    k: usize,
    mode: &Mode,
    rng: &mut Option<ChaCha8Rng>,
    scratch: &mut Scratch,
    collect: &mut Option<&mut Vec<SavedMatch>>,
) -> Result<bool, EngineError> {
    if k == rule.lhs.len() {
        return at_leaf(game, state, rule, mode, rng, scratch, collect);
    }
    let kernel = &rule.lhs[k];
    let has_ellipsis = kernel.iter().any(|c| matches!(c, Cell::Ellipsis));
    let pos_mark = scratch.positions.len();
    let bind_mark = scratch.bindings.len();
    scratch.pos_starts.push(pos_mark);
    scratch.bind_starts.push(bind_mark);

    let n_candidates = scratch.candidates[k].len();
    if has_ellipsis {
        // Least total gap first, then anchor scan order.
        let max_gap = state.width.max(state.height) as u32;
        for total in 0..=max_gap {
            for ci in 0..n_candidates {
                let anchor = scratch.candidates[k][ci];
                if match_kernel_at(game, state, rule, k, anchor, Some(total), scratch)
                    && rec_kernels(game, state, rule, k + 1, mode, rng, scratch, collect)?
                {
                    return Ok(true);
                }
                truncate(scratch, pos_mark, bind_mark);
            }
        }
    } else {
        for ci in 0..n_candidates {
            let anchor = scratch.candidates[k][ci];
            if match_kernel_at(game, state, rule, k, anchor, None, scratch)
                && rec_kernels(game, state, rule, k + 1, mode, rng, scratch, collect)?
            {
                return Ok(true);
            }
            truncate(scratch, pos_mark, bind_mark);
        }
    }
    scratch.pos_starts.pop();
    scratch.bind_starts.pop();
    Ok(false)
}

fn truncate(scratch: &mut Scratch, pos_mark: usize, bind_mark: usize) {
    scratch.positions.truncate(pos_mark);
    scratch.bindings.truncate(bind_mark);
}

fn at_leaf(
    game: &GameDef,
    state: &mut GridState,
    rule: &CompiledRule,
    mode: &Mode,
    rng: &mut Option<ChaCha8Rng>,
    scratch: &mut Scratch,
    collect: &mut Option<&mut Vec<SavedMatch>>,
) -> Result<bool, EngineError> {
    match mode {
        Mode::MatchOnly => Ok(true),
        Mode::ApplyFirst => apply_at(game, state, rule, scratch, rng),
        Mode::Collect => {
            let mut probe = state.clone();
            if apply_at(game, &mut probe, rule, scratch, rng)? {
                if let Some(sink) = collect.as_mut() {
                    sink.push(SavedMatch {
                        rule: 0,
                        positions: scratch.positions.clone(),
                        bindings: scratch.bindings.clone(),
                    });
                }
            }
            Ok(false) // keep enumerating
        }
    }
}

/// Candidate anchors per kernel, row-major. Anchors are derived from the
/// presence planes of the first positively-required entry before any
/// line detector; kernels with no such probe scan every cell.
fn build_candidates(state: &GridState, rule: &CompiledRule, scratch: &mut Scratch) {
    let width = state.width as i32;
    let height = state.height as i32;
    let wpp = state.words_per_plane();
    let cells = state.cells();
    let (dr, dc) = rule.direction.delta();

    while scratch.candidates.len() < rule.lhs.len() {
        scratch.candidates.push(Vec::new());
    }

    for (k, kernel) in rule.lhs.iter().enumerate() {
        let list = &mut scratch.candidates[k];
        list.clear();

        // Probe: first positive entry within the leading segment.
        let mut probe: Option<(usize, &[ObjectId])> = None;
        for (j, cell) in kernel.iter().enumerate() {
            match cell {
                Cell::Ellipsis => break,
                Cell::Patterns(entries) => {
                    if let Some(e) = entries.iter().find(|e| e.qualifier != Qualifier::Absent) {
                        probe = Some((j, &e.members));
                        break;
                    }
                }
            }
        }

        match probe {
            Some((j, members)) => {
                let off_r = j as i32 * dr;
                let off_c = j as i32 * dc;
                for w in 0..wpp {
                    let mut bits = 0u64;
                    for &m in members {
                        bits |= state.presence_plane(m)[w];
                    }
                    while bits != 0 {
                        let cell = (w << 6) + bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        if cell >= cells {
                            break;
                        }
                        let r = cell as i32 / width - off_r;
                        let c = cell as i32 % width - off_c;
                        if r >= 0 && r < height && c >= 0 && c < width {
                            list.push((r * width + c) as u32);
                        }
                    }
                }
            }
            None => list.extend(0..cells as u32),
        }
    }
}

/// Match one kernel at `anchor`, pushing positions and bindings.
/// `total_gap` constrains the sum of line-detector gaps exactly.
fn match_kernel_at(
    game: &GameDef,
    state: &GridState,
    rule: &CompiledRule,
    k: usize,
    anchor: u32,
    total_gap: Option<u32>,
    scratch: &mut Scratch,
) -> bool {
    let kernel = &rule.lhs[k];
    let width = state.width as i32;
    let (dr, dc) = rule.direction.delta();
    let start_r = anchor as i32 / width;
    let start_c = anchor as i32 % width;

    let ellipses_total = kernel.iter().filter(|c| matches!(c, Cell::Ellipsis)).count();

    #[allow(clippy::too_many_arguments)]
    fn go(
        game: &GameDef,
        state: &GridState,
        kernel: &[Cell],
        idx: usize,
        r: i32,
        c: i32,
        dr: i32,
        dc: i32,
        gap_left: u32,
        ellipses_left: usize,
        constrained: bool,
        scratch: &mut Scratch,
    ) -> bool {
        if idx == kernel.len() {
            return !constrained || gap_left == 0;
        }
        match &kernel[idx] {
            Cell::Ellipsis => {
                scratch.positions.push(ELLIPSIS_POS);
                let (lo, hi) = if !constrained {
                    (0, 0)
                } else if ellipses_left == 1 {
                    (gap_left, gap_left)
                } else {
                    (0, gap_left)
                };
                for g in lo..=hi {
                    if go(
                        game,
                        state,
                        kernel,
                        idx + 1,
                        r + g as i32 * dr,
                        c + g as i32 * dc,
                        dr,
                        dc,
                        gap_left - g,
                        ellipses_left - 1,
                        constrained,
                        scratch,
                    ) {
                        return true;
                    }
                }
                scratch.positions.pop();
                false
            }
            Cell::Patterns(entries) => {
                let width = state.width as i32;
                let height = state.height as i32;
                if r < 0 || r >= height || c < 0 || c >= width {
                    return false;
                }
                let cell = (r * width + c) as usize;
                let bind_mark = scratch.bindings.len();
                if !match_cell(game, state, entries, cell, &mut scratch.bindings) {
                    scratch.bindings.truncate(bind_mark);
                    return false;
                }
                scratch.positions.push(cell as u32);
                if go(
                    game,
                    state,
                    kernel,
                    idx + 1,
                    r + dr,
                    c + dc,
                    dr,
                    dc,
                    gap_left,
                    ellipses_left,
                    constrained,
                    scratch,
                ) {
                    return true;
                }
                scratch.positions.pop();
                scratch.bindings.truncate(bind_mark);
                false
            }
        }
    }

    go(
        game,
        state,
        kernel,
        0,
        start_r,
        start_c,
        dr,
        dc,
        total_gap.unwrap_or(0),
        ellipses_total,
        total_gap.is_some(),
        scratch,
    )
}

/// Match a cell's entries, appending one binding per entry.
fn match_cell(
    game: &GameDef,
    state: &GridState,
    entries: &[crate::compile::PatternEntry],
    cell: usize,
    bindings: &mut Vec<(ObjectId, u8)>,
) -> bool {
    for e in entries {
        match e.qualifier {
            Qualifier::Absent => {
                if e.members.iter().any(|&m| state.has_object(m, cell)) {
                    return false;
                }
                bindings.push((0, NO_DIR));
            }
            Qualifier::Present => match state.first_member_at(&e.members, cell) {
                Some(m) => bindings.push((m, NO_DIR)),
                None => return false,
            },
            Qualifier::Stationary => {
                let found = e.members.iter().copied().find(|&m| {
                    state.has_object(m, cell) && state.force_bits(game.layers.layer_of[m as usize], cell) == 0
                });
                match found {
                    Some(m) => bindings.push((m, NO_DIR)),
                    None => return false,
                }
            }
            Qualifier::Force(d) => {
                let found = e.members.iter().copied().find(|&m| {
                    state.has_object(m, cell)
                        && state.force_bits(game.layers.layer_of[m as usize], cell) & d.mask() != 0
                });
                match found {
                    Some(m) => bindings.push((m, d as u8)),
                    None => return false,
                }
            }
            Qualifier::AnyOf(mask) => {
                let mut hit = None;
                for &m in e.members.iter() {
                    if !state.has_object(m, cell) {
                        continue;
                    }
                    let bits = state.force_bits(game.layers.layer_of[m as usize], cell) & mask & DIR_MASK;
                    if bits != 0 {
                        hit = Some((m, bits.trailing_zeros() as u8));
                        break;
                    }
                }
                match hit {
                    Some((m, d)) => bindings.push((m, d)),
                    None => return false,
                }
            }
            Qualifier::Action => {
                let found = e.members.iter().copied().find(|&m| {
                    state.has_object(m, cell)
                        && state.force_bits(game.layers.layer_of[m as usize], cell) & ACTION_MASK != 0
                });
                match found {
                    Some(m) => bindings.push((m, NO_DIR)),
                    None => return false,
                }
            }
            Qualifier::RandomDir => return false, // left side never carries randomdir
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

/// Project the right side at the matched positions. Returns whether any
/// presence or force bit actually changed; an ineffective projection
/// leaves the state untouched.
fn apply_at(
    game: &GameDef,
    state: &mut GridState,
    rule: &CompiledRule,
    scratch: &mut Scratch,
    rng: &mut Option<ChaCha8Rng>,
) -> Result<bool, EngineError> {
    let rhs = rule.rhs.as_ref().expect("apply_at requires a right side");
    let mut changed = false;

    for (k, (lk, rk)) in rule.lhs.iter().zip(rhs).enumerate() {
        let pos_base = scratch.pos_starts[k];
        let mut entry_base = scratch.bind_starts[k];
        for (i, (lc, rc)) in lk.iter().zip(rk).enumerate() {
            let les = match lc {
                Cell::Ellipsis => continue,
                Cell::Patterns(les) => les,
            };
            let pos = scratch.positions[pos_base + i];
            debug_assert_ne!(pos, ELLIPSIS_POS);
            let cell = pos as usize;

            // Accumulate final per-object and per-layer intents so a
            // delete-then-readd of the same object cancels instead of
            // counting as a change.
            scratch.obj_intents.clear();
            scratch.force_intents.clear();

            for &del in &rule.deletes[k][i] {
                let (m, _) = scratch.bindings[entry_base + del as usize];
                intend_obj(&mut scratch.obj_intents, m, false);
                intend_force(&mut scratch.force_intents, game.layers.layer_of[m as usize], 0);
            }

            let Cell::Patterns(res) = rc else { unreachable!("shape validated at compile time") };
            for re in res {
                match re.qualifier {
                    Qualifier::Absent => {
                        for &m in re.members.iter() {
                            if state.has_object(m, cell) {
                                intend_obj(&mut scratch.obj_intents, m, false);
                                intend_force(&mut scratch.force_intents, game.layers.layer_of[m as usize], 0);
                            }
                        }
                    }
                    q => {
                        let m = match re.bind {
                            Some(b) => scratch.bindings[entry_base + b as usize].0,
                            None => re.members[0],
                        };
                        let layer = game.layers.layer_of[m as usize];
                        // Adding an object makes it the sole occupant of
                        // its layer at this cell.
                        for &other in &game.layers.layers[layer as usize] {
                            if other != m {
                                intend_obj(&mut scratch.obj_intents, other, false);
                            }
                        }
                        intend_obj(&mut scratch.obj_intents, m, true);
                        let mask = match q {
                            Qualifier::Present | Qualifier::Stationary => 0,
                            Qualifier::Force(d) => d.mask(),
                            Qualifier::Action => ACTION_MASK,
                            Qualifier::AnyOf(_) => {
                                let b = re.bind.expect("bound at compile time");
                                let dir = scratch.bindings[entry_base + b as usize].1;
                                if dir == NO_DIR {
                                    0
                                } else {
                                    1 << dir
                                }
                            }
                            Qualifier::RandomDir => {
                                let r = rng.as_mut().ok_or(EngineError::RandomWithoutSeed)?;
                                1u8 << r.gen_range(0..4)
                            }
                            Qualifier::Absent => unreachable!(),
                        };
                        intend_force(&mut scratch.force_intents, layer, mask);
                    }
                }
            }

            for idx in 0..scratch.obj_intents.len() {
                let (m, val) = scratch.obj_intents[idx];
                if state.has_object(m, cell) != val {
                    state.set_object(m, cell, val);
                    changed = true;
                }
            }
            for idx in 0..scratch.force_intents.len() {
                let (layer, mask) = scratch.force_intents[idx];
                if state.force_bits(layer, cell) != mask {
                    state.set_force_bits(layer, cell, mask);
                    changed = true;
                }
            }

            entry_base += les.len();
        }
    }

    #[cfg(debug_assertions)]
    if changed {
        if let Err(msg) = state.check_layer_exclusivity(game) {
            panic!("layer exclusivity violated after rule at line {}: {msg}", rule.source_line);
        }
    }
    Ok(changed)
}

fn intend_obj(intents: &mut Vec<(ObjectId, bool)>, object: ObjectId, val: bool) {
    for slot in intents.iter_mut() {
        if slot.0 == object {
            slot.1 = val;
            return;
        }
    }
    intents.push((object, val));
}

fn intend_force(intents: &mut Vec<(u16, u8)>, layer: u16, mask: u8) {
    for slot in intents.iter_mut() {
        if slot.0 == layer {
            slot.1 = mask;
            return;
        }
    }
    intents.push((layer, mask));
}

//! Name resolution and game compilation: [`GameAst`] → [`GameDef`].

pub mod rules;

use std::collections::HashMap;

use serde::Serialize;

use crate::ast::*;
use crate::color::Color;
use crate::diag::{Diagnostic, Diagnostics, Section};

pub use rules::{
    compile_rule, Cell, Command, CompiledRule, Dir, Kernel, ObjectId, PatternEntry, Qualifier, RuleGroup,
};

pub const NO_LAYER: u16 = u16::MAX;

#[derive(Debug, Clone, Serialize)]
pub struct ObjectRecord {
    pub id: ObjectId,
    pub name: String,
    pub colors: Vec<Color>,
    #[serde(skip)]
    pub sprite: Option<Vec<Vec<Option<u8>>>>,
    /// Collision layer index, or [`NO_LAYER`] when never assigned.
    pub layer: u16,
}

/// Atomic object records with dense ids in declaration order.
#[derive(Debug, Clone, Default)]
pub struct ObjectTable {
    pub objects: Vec<ObjectRecord>,
    by_name: HashMap<String, ObjectId>,
}

impl ObjectTable {
    pub fn id_of(&self, name: &str) -> Option<ObjectId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn name_of(&self, id: ObjectId) -> &str {
        &self.objects[id as usize].name
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameKind {
    /// Atomic object or disjunctive (`or`) meta-object.
    Meta,
    /// Conjunctive (`and`) aggregate: all members at once.
    Aggregate,
}

#[derive(Debug, Clone)]
pub struct LegendEntry {
    pub kind: NameKind,
    /// Sorted atomic ids.
    pub members: Vec<ObjectId>,
}

#[derive(Debug, Clone, Default)]
pub struct LegendTable {
    pub entries: HashMap<String, LegendEntry>,
    pub glyphs: HashMap<char, LegendEntry>,
}

#[derive(Debug, Clone, Default)]
pub struct LayerTable {
    /// Atomic ids per layer, in declaration order.
    pub layers: Vec<Vec<ObjectId>>,
    /// Per object id: owning layer or [`NO_LAYER`].
    pub layer_of: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WinKind {
    AllOn,
    SomeOn,
    NoOn,
    Some,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct WinCondition {
    pub kind: WinKind,
    pub a: Vec<ObjectId>,
    pub b: Option<Vec<ObjectId>>,
}

#[derive(Debug, Clone)]
pub enum LevelDef {
    Grid {
        width: usize,
        height: usize,
        /// Row-major; each cell lists the atomic ids initially present.
        cells: Vec<Vec<ObjectId>>,
    },
    Message(String),
}

impl LevelDef {
    pub fn is_playable(&self) -> bool {
        matches!(self, LevelDef::Grid { .. })
    }
}

#[derive(Debug, Clone)]
pub enum Block {
    Plain(Vec<RuleGroup>),
    Loop(Vec<RuleGroup>),
}

impl Block {
    pub fn groups(&self) -> &[RuleGroup] {
        match self {
            Block::Plain(g) | Block::Loop(g) => g,
        }
    }
}

/// Engine-relevant prelude settings; everything else stays in `extra`.
#[derive(Debug, Clone, Default)]
pub struct Prelude {
    pub title: Option<String>,
    pub author: Option<String>,
    pub homepage: Option<String>,
    pub run_rules_on_level_start: bool,
    pub noaction: bool,
    pub norepeat_action: bool,
    pub again_interval: Option<f64>,
    pub realtime_interval: Option<f64>,
    pub background_color: Option<String>,
    pub text_color: Option<String>,
    pub flickscreen: Option<(u32, u32)>,
    pub zoomscreen: Option<(u32, u32)>,
    pub extra: Vec<(String, Option<String>)>,
}

/// An immutable compiled game, shareable across engine instances.
#[derive(Debug, Clone)]
pub struct GameDef {
    pub objects: ObjectTable,
    pub legend: LegendTable,
    pub layers: LayerTable,
    pub blocks: Vec<Block>,
    pub late_groups: Vec<RuleGroup>,
    pub win_conditions: Vec<WinCondition>,
    pub levels: Vec<LevelDef>,
    pub prelude: Prelude,
    pub player_ids: Vec<ObjectId>,
    pub background_id: ObjectId,
    /// Any `random` rule group or `randomdir` qualifier present.
    pub has_random: bool,
    /// Any rule references the `action` qualifier.
    pub uses_action: bool,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub game: GameDef,
    pub warnings: Vec<Diagnostic>,
}

/// Name resolution context shared by rule/win/level compilation.
pub struct Tables {
    pub objects: ObjectTable,
    pub legend: LegendTable,
}

impl Tables {
    /// Resolve a name to (sorted atomic members, kind).
    pub fn resolve_name(&self, name: &str) -> Option<(Vec<ObjectId>, NameKind)> {
        if let Some(e) = self.legend.entries.get(name) {
            return Some((e.members.clone(), e.kind));
        }
        if let Some(id) = self.objects.id_of(name) {
            return Some((vec![id], NameKind::Meta));
        }
        None
    }
}

pub fn playable_level_indices(game: &GameDef) -> Vec<usize> {
    game.levels.iter().enumerate().filter(|(_, l)| l.is_playable()).map(|(i, _)| i).collect()
}

// ---------------------------------------------------------------------------
// compile_game
// ---------------------------------------------------------------------------

/// Resolve all names, expand rules, and validate levels and win
/// conditions into an executable [`GameDef`].
pub fn compile_game(ast: &GameAst) -> Result<Compiled, Diagnostics> {
    let mut errors: Vec<Diagnostic> = Vec::new();
    let mut warnings: Vec<Diagnostic> = Vec::new();

    let objects = build_object_table(ast);
    let legend = resolve_legend_impl(ast, &objects, &mut errors);
    let tables = Tables { objects, legend };

    let layer_table = build_layers_impl(ast, &tables, &mut errors, &mut warnings);

    // Rules.
    #[derive(Clone, Copy, PartialEq)]
    enum Sink {
        None,
        Plain,
        Loop,
        Late,
    }
    let mut blocks: Vec<Block> = Vec::new();
    let mut late_groups: Vec<RuleGroup> = Vec::new();
    let mut plain_run: Vec<RuleGroup> = Vec::new();
    let mut loop_run: Option<(usize, Vec<RuleGroup>)> = None;
    let mut last_sink = Sink::None;
    let mut has_random = false;

    for line in &ast.rule_lines {
        match line {
            RuleLine::StartLoop { line } => {
                if loop_run.is_some() {
                    errors.push(Diagnostic::error(Some(Section::Rules), *line, "nested `startloop`"));
                    continue;
                }
                if !plain_run.is_empty() {
                    blocks.push(Block::Plain(std::mem::take(&mut plain_run)));
                }
                loop_run = Some((*line, Vec::new()));
                last_sink = Sink::None;
            }
            RuleLine::EndLoop { line } => match loop_run.take() {
                Some((_, groups)) => {
                    if groups.is_empty() {
                        errors.push(Diagnostic::error(Some(Section::Rules), *line, "empty loop block"));
                    } else {
                        blocks.push(Block::Loop(groups));
                    }
                    last_sink = Sink::None;
                }
                None => {
                    errors.push(Diagnostic::error(Some(Section::Rules), *line, "`endloop` without `startloop`"));
                }
            },
            RuleLine::Rule(rule) => {
                let group = match compile_rule(rule, &tables) {
                    Ok(g) => g,
                    Err(mut es) => {
                        errors.append(&mut es);
                        continue;
                    }
                };
                has_random |= group.is_random || group_uses_randomdir(&group);
                check_rule_layers(&group, &tables, &layer_table, rule.line, &mut errors);

                if rule.plus {
                    let target: Option<&mut RuleGroup> = match last_sink {
                        Sink::Loop => loop_run.as_mut().and_then(|(_, g)| g.last_mut()),
                        Sink::Plain => plain_run.last_mut(),
                        Sink::Late => late_groups.last_mut(),
                        Sink::None => None,
                    };
                    match target {
                        Some(prev) if prev.is_late == group.is_late && prev.is_random == group.is_random => {
                            prev.rules.extend(group.rules);
                        }
                        Some(_) => {
                            errors.push(Diagnostic::error(
                                Some(Section::Rules),
                                rule.line,
                                "`+` cannot join rules with different `late`/`random` prefixes",
                            ));
                        }
                        None => {
                            errors.push(Diagnostic::error(
                                Some(Section::Rules),
                                rule.line,
                                "`+` has no preceding rule to join",
                            ));
                        }
                    }
                    continue;
                }

                if group.is_late {
                    if loop_run.is_some() {
                        errors.push(Diagnostic::error(
                            Some(Section::Rules),
                            rule.line,
                            "`late` rules cannot appear inside loop blocks",
                        ));
                    } else {
                        late_groups.push(group);
                        last_sink = Sink::Late;
                    }
                } else if let Some((_, groups)) = loop_run.as_mut() {
                    groups.push(group);
                    last_sink = Sink::Loop;
                } else {
                    plain_run.push(group);
                    last_sink = Sink::Plain;
                }
            }
        }
    }
    if let Some((line, _)) = loop_run {
        errors.push(Diagnostic::error(Some(Section::Rules), line, "`startloop` is never closed"));
    }
    if !plain_run.is_empty() {
        blocks.push(Block::Plain(plain_run));
    }

    // Win conditions.
    let mut win_conditions = Vec::new();
    for w in &ast.win_conditions {
        if let Some(cond) = compile_win_condition(w, &tables, &mut errors) {
            win_conditions.push(cond);
        }
    }

    // Player and background bindings.
    let background_id = match tables.resolve_name("background") {
        Some((members, _)) if !members.is_empty() => members[0],
        _ => {
            errors.push(Diagnostic::error(Some(Section::Objects), 1, "no `background` object is defined"));
            0
        }
    };
    let player_ids = match tables.resolve_name("player") {
        Some((members, _)) if !members.is_empty() => members,
        _ => {
            errors.push(Diagnostic::error(Some(Section::Legend), 1, "no `player` object or meta-object is defined"));
            Vec::new()
        }
    };

    // Levels.
    let levels = compile_levels(ast, &tables, &layer_table, background_id, &mut errors);

    let prelude = compile_prelude(ast, &mut warnings);
    let uses_action = blocks
        .iter()
        .flat_map(|b| b.groups())
        .chain(&late_groups)
        .any(group_uses_action);

    if !errors.is_empty() {
        errors.extend(warnings);
        return Err(Diagnostics(errors));
    }

    let Tables { objects: mut object_table, legend } = tables;
    for (id, layer) in layer_table.layer_of.iter().enumerate() {
        object_table.objects[id].layer = *layer;
    }

    Ok(Compiled {
        game: GameDef {
            objects: object_table,
            legend,
            layers: layer_table,
            blocks,
            late_groups,
            win_conditions,
            levels,
            prelude,
            player_ids,
            background_id,
            has_random,
            uses_action,
        },
        warnings,
    })
}

fn group_uses_randomdir(group: &RuleGroup) -> bool {
    group.rules.iter().any(|r| {
        r.rhs.iter().flatten().flatten().any(|c| match c {
            Cell::Patterns(es) => es.iter().any(|e| e.qualifier == Qualifier::RandomDir),
            Cell::Ellipsis => false,
        })
    })
}

fn group_uses_action(group: &RuleGroup) -> bool {
    group.rules.iter().any(|r| {
        r.lhs
            .iter()
            .chain(r.rhs.iter().flatten())
            .flatten()
            .any(|c| matches!(c, Cell::Patterns(es) if es.iter().any(|e| e.qualifier == Qualifier::Action)))
    })
}

fn build_object_table(ast: &GameAst) -> ObjectTable {
    let mut table = ObjectTable::default();
    for (i, decl) in ast.objects.iter().enumerate() {
        let id = i as ObjectId;
        table.by_name.entry(decl.name.clone()).or_insert(id);
        table.objects.push(ObjectRecord {
            id,
            name: decl.name.clone(),
            colors: decl.colors.clone(),
            sprite: decl.sprite.clone(),
            layer: NO_LAYER,
        });
    }
    table
}

// ---------------------------------------------------------------------------
// Legend resolution
// ---------------------------------------------------------------------------

/// Transitively resolve legend definitions to atomic id sets.
pub fn resolve_legend(ast: &GameAst, objects: &ObjectTable) -> Result<LegendTable, Diagnostics> {
    let mut errors = Vec::new();
    let table = resolve_legend_impl(ast, objects, &mut errors);
    if errors.is_empty() {
        Ok(table)
    } else {
        Err(Diagnostics(errors))
    }
}

fn resolve_legend_impl(ast: &GameAst, objects: &ObjectTable, errors: &mut Vec<Diagnostic>) -> LegendTable {
    let decls: HashMap<&str, &LegendDecl> = ast.legend.iter().map(|d| (d.name.as_str(), d)).collect();

    for decl in &ast.legend {
        if objects.id_of(&decl.name).is_some() {
            errors.push(Diagnostic::error(
                Some(Section::Legend),
                decl.line,
                format!("legend name `{}` collides with an object name", decl.name),
            ));
        }
    }

    #[derive(Clone, Copy, PartialEq)]
    enum State {
        InProgress,
        Done,
    }
    let mut states: HashMap<String, State> = HashMap::new();
    let mut resolved: HashMap<String, LegendEntry> = HashMap::new();

    fn resolve<'a>(
        name: &'a str,
        decls: &HashMap<&'a str, &'a LegendDecl>,
        objects: &ObjectTable,
        states: &mut HashMap<String, State>,
        resolved: &mut HashMap<String, LegendEntry>,
        errors: &mut Vec<Diagnostic>,
        at_line: usize,
    ) -> Option<LegendEntry> {
        if let Some(id) = objects.id_of(name) {
            return Some(LegendEntry { kind: NameKind::Meta, members: vec![id] });
        }
        if let Some(e) = resolved.get(name) {
            return Some(e.clone());
        }
        let decl = match decls.get(name) {
            Some(d) => *d,
            None => {
                errors.push(Diagnostic::error(
                    Some(Section::Legend),
                    at_line,
                    format!("undefined name `{name}` in legend"),
                ));
                return None;
            }
        };
        match states.get(name) {
            Some(State::InProgress) => {
                errors.push(Diagnostic::error(
                    Some(Section::Legend),
                    decl.line,
                    format!("cyclic legend definition involving `{name}`"),
                ));
                return None;
            }
            Some(State::Done) => return resolved.get(name).cloned(),
            None => {}
        }
        states.insert(name.to_string(), State::InProgress);

        let mut members: Vec<ObjectId> = Vec::new();
        let mut kind = match decl.op {
            LegendOp::Or => NameKind::Meta,
            LegendOp::And => NameKind::Aggregate,
            LegendOp::Alias => NameKind::Meta, // refined below
        };
        let mut ok = true;
        for part in &decl.parts {
            match resolve(part, decls, objects, states, resolved, errors, decl.line) {
                Some(sub) => {
                    match decl.op {
                        LegendOp::Or if sub.kind == NameKind::Aggregate => {
                            errors.push(Diagnostic::error(
                                Some(Section::Legend),
                                decl.line,
                                format!("aggregate `{part}` cannot be a member of an `or` definition"),
                            ));
                            ok = false;
                        }
                        LegendOp::And if sub.kind == NameKind::Aggregate => {
                            // and-of-and flattens
                        }
                        LegendOp::And if sub.members.len() > 1 => {
                            errors.push(Diagnostic::error(
                                Some(Section::Legend),
                                decl.line,
                                format!("meta-object `{part}` cannot be a member of an `and` definition"),
                            ));
                            ok = false;
                        }
                        LegendOp::Alias => kind = sub.kind,
                        _ => {}
                    }
                    members.extend(sub.members);
                }
                None => ok = false,
            }
        }
        states.insert(name.to_string(), State::Done);
        if !ok {
            return None;
        }
        members.sort_unstable();
        members.dedup();
        let entry = LegendEntry { kind, members };
        resolved.insert(name.to_string(), entry.clone());
        Some(entry)
    }

    for decl in &ast.legend {
        resolve(&decl.name, &decls, objects, &mut states, &mut resolved, errors, decl.line);
    }

    // Glyph bindings: single-character legend names, inline object
    // glyphs, and single-character object names.
    let mut glyphs: HashMap<char, LegendEntry> = HashMap::new();
    for decl in &ast.legend {
        let mut chars = decl.name.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if let Some(entry) = resolved.get(&decl.name) {
                if glyphs.insert(c, entry.clone()).is_some() {
                    errors.push(Diagnostic::error(
                        Some(Section::Legend),
                        decl.line,
                        format!("glyph `{c}` is bound more than once"),
                    ));
                }
            }
        }
    }
    for decl in &ast.objects {
        let id = match objects.id_of(&decl.name) {
            Some(id) => id,
            None => continue,
        };
        let entry = LegendEntry { kind: NameKind::Meta, members: vec![id] };
        if let Some(c) = decl.glyph {
            if glyphs.insert(c, entry.clone()).is_some() {
                errors.push(Diagnostic::error(
                    Some(Section::Objects),
                    decl.line,
                    format!("glyph `{c}` is bound more than once"),
                ));
            }
        }
        let mut chars = decl.name.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            glyphs.entry(c).or_insert(entry);
        }
    }

    LegendTable { entries: resolved, glyphs }
}

// ---------------------------------------------------------------------------
// Collision layers
// ---------------------------------------------------------------------------

/// Expand layer declarations to atomic members; reassignment is
/// last-write-wins with a warning.
pub fn build_layers(ast: &GameAst, tables: &Tables) -> Result<(LayerTable, Vec<Diagnostic>), Diagnostics> {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();
    let table = build_layers_impl(ast, tables, &mut errors, &mut warnings);
    if errors.is_empty() {
        Ok((table, warnings))
    } else {
        Err(Diagnostics(errors))
    }
}

fn build_layers_impl(
    ast: &GameAst,
    tables: &Tables,
    errors: &mut Vec<Diagnostic>,
    warnings: &mut Vec<Diagnostic>,
) -> LayerTable {
    let n = tables.objects.len();
    let mut layer_of = vec![NO_LAYER; n];
    let mut layers: Vec<Vec<ObjectId>> = Vec::with_capacity(ast.collision_layers.len());

    for (layer_idx, decl) in ast.collision_layers.iter().enumerate() {
        let mut this_layer: Vec<ObjectId> = Vec::new();
        for name in &decl.names {
            match tables.resolve_name(name) {
                Some((members, _)) => {
                    for id in members {
                        if layer_of[id as usize] != NO_LAYER {
                            warnings.push(Diagnostic::warning(
                                Some(Section::CollisionLayers),
                                decl.line,
                                format!(
                                    "object `{}` reassigned from layer {} to layer {}",
                                    tables.objects.name_of(id),
                                    layer_of[id as usize],
                                    layer_idx
                                ),
                            ));
                            if let Some(old) = layers.get_mut(layer_of[id as usize] as usize) {
                                old.retain(|&o| o != id);
                            }
                        }
                        layer_of[id as usize] = layer_idx as u16;
                        if !this_layer.contains(&id) {
                            this_layer.push(id);
                        }
                    }
                }
                None => {
                    errors.push(Diagnostic::error(
                        Some(Section::CollisionLayers),
                        decl.line,
                        format!("unknown name `{name}` in collision layers"),
                    ));
                }
            }
        }
        layers.push(this_layer);
    }

    LayerTable { layers, layer_of }
}

/// Rules may only reference objects that live on some collision layer.
fn check_rule_layers(
    group: &RuleGroup,
    tables: &Tables,
    layers: &LayerTable,
    line: usize,
    errors: &mut Vec<Diagnostic>,
) {
    let mut reported: Vec<ObjectId> = Vec::new();
    for rule in &group.rules {
        for kernel in rule.lhs.iter().chain(rule.rhs.iter().flatten()) {
            for cell in kernel {
                let Cell::Patterns(entries) = cell else { continue };
                for e in entries {
                    for &m in &e.members {
                        if layers.layer_of.get(m as usize).copied() == Some(NO_LAYER) && !reported.contains(&m) {
                            reported.push(m);
                            errors.push(Diagnostic::error(
                                Some(Section::Rules),
                                line,
                                format!(
                                    "object `{}` is used in a rule but belongs to no collision layer",
                                    tables.objects.name_of(m)
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Win conditions and levels
// ---------------------------------------------------------------------------

fn compile_win_condition(
    w: &WinConditionAst,
    tables: &Tables,
    errors: &mut Vec<Diagnostic>,
) -> Option<WinCondition> {
    let mut resolve = |name: &str| -> Option<Vec<ObjectId>> {
        match tables.resolve_name(name) {
            Some((members, _)) => Some(members),
            None => {
                errors.push(Diagnostic::error(
                    Some(Section::WinConditions),
                    w.line,
                    format!("unknown name `{name}` in win condition"),
                ));
                None
            }
        }
    };
    let a = resolve(&w.a)?;
    let b = match &w.b {
        Some(name) => Some(resolve(name)?),
        None => None,
    };
    let kind = match w.kind {
        WinKindAst::AllOn => WinKind::AllOn,
        WinKindAst::SomeOn => WinKind::SomeOn,
        WinKindAst::NoOn => WinKind::NoOn,
        WinKindAst::Some => WinKind::Some,
        WinKindAst::None => WinKind::None,
    };
    Some(WinCondition { kind, a, b })
}

fn compile_levels(
    ast: &GameAst,
    tables: &Tables,
    layers: &LayerTable,
    background_id: ObjectId,
    errors: &mut Vec<Diagnostic>,
) -> Vec<LevelDef> {
    let mut out = Vec::with_capacity(ast.levels.len());
    for entry in &ast.levels {
        match entry {
            LevelEntry::Message { text, .. } => out.push(LevelDef::Message(text.clone())),
            LevelEntry::Grid { rows, line } => {
                let height = rows.len();
                let width = rows.first().map(|r| r.len()).unwrap_or(0);
                let mut cells: Vec<Vec<ObjectId>> = Vec::with_capacity(width * height);
                for row in rows {
                    for &glyph in row {
                        let mut ids: Vec<ObjectId> = vec![background_id];
                        match tables.legend.glyphs.get(&glyph) {
                            Some(e) if e.kind == NameKind::Meta && e.members.len() > 1 => {
                                errors.push(Diagnostic::error(
                                    Some(Section::Levels),
                                    *line,
                                    format!("glyph `{glyph}` is bound to a meta-object and is ambiguous in a level"),
                                ));
                            }
                            Some(e) => {
                                for &m in &e.members {
                                    if !ids.contains(&m) {
                                        ids.push(m);
                                    }
                                }
                            }
                            None => {
                                errors.push(Diagnostic::error(
                                    Some(Section::Levels),
                                    *line,
                                    format!("unknown glyph `{glyph}` in level"),
                                ));
                            }
                        }
                        cells.push(ids);
                    }
                }
                // Layer assignment and exclusivity.
                for (idx, ids) in cells.iter().enumerate() {
                    let mut seen: Vec<u16> = Vec::new();
                    for &id in ids {
                        let layer = layers.layer_of.get(id as usize).copied().unwrap_or(NO_LAYER);
                        if layer == NO_LAYER {
                            errors.push(Diagnostic::error(
                                Some(Section::Levels),
                                *line,
                                format!(
                                    "object `{}` appears in a level but belongs to no collision layer",
                                    tables.objects.name_of(id)
                                ),
                            ));
                        } else if seen.contains(&layer) {
                            errors.push(Diagnostic::error(
                                Some(Section::Levels),
                                *line,
                                format!(
                                    "cell ({}, {}) holds two objects from collision layer {layer}",
                                    idx / width.max(1),
                                    idx % width.max(1)
                                ),
                            ));
                        } else {
                            seen.push(layer);
                        }
                    }
                }
                out.push(LevelDef::Grid { width, height, cells });
            }
        }
    }
    out
}

fn compile_prelude(ast: &GameAst, warnings: &mut Vec<Diagnostic>) -> Prelude {
    let mut p = Prelude::default();
    for entry in &ast.prelude {
        let v = entry.value.clone();
        match entry.key.as_str() {
            "title" => p.title = v,
            "author" => p.author = v,
            "homepage" => p.homepage = v,
            "run_rules_on_level_start" => p.run_rules_on_level_start = true,
            "noaction" => p.noaction = true,
            "norepeat_action" => p.norepeat_action = true,
            "again_interval" => p.again_interval = v.as_deref().and_then(|s| s.parse().ok()),
            "realtime_interval" => {
                p.realtime_interval = v.as_deref().and_then(|s| s.parse().ok());
                warnings.push(Diagnostic::warning(
                    Some(Section::Prelude),
                    entry.line,
                    "`realtime_interval` is parsed but ignored: this engine only ticks on input",
                ));
            }
            "background_color" => p.background_color = v,
            "text_color" => p.text_color = v,
            "flickscreen" => p.flickscreen = v.as_deref().and_then(parse_dimensions),
            "zoomscreen" => p.zoomscreen = v.as_deref().and_then(parse_dimensions),
            _ => p.extra.push((entry.key.clone(), v)),
        }
    }
    p
}

fn parse_dimensions(s: &str) -> Option<(u32, u32)> {
    let (w, h) = s.split_once('x')?;
    Some((w.trim().parse().ok()?, h.trim().parse().ok()?))
}

// ---------------------------------------------------------------------------
// Versioned JSON export
// ---------------------------------------------------------------------------

impl GameDef {
    /// Serialize the compiled game (rules in expanded form) for golden
    /// file comparisons. The format is versioned; bump on layout change.
    pub fn to_json(&self) -> serde_json::Value {
        use serde_json::json;
        let objects: Vec<_> = self
            .objects
            .objects
            .iter()
            .map(|o| {
                json!({
                    "id": o.id,
                    "name": o.name,
                    "layer": if o.layer == NO_LAYER { None } else { Some(o.layer) },
                    "colors": o.colors,
                })
            })
            .collect();
        let block_json = |groups: &[RuleGroup], looped: bool| {
            json!({
                "loop": looped,
                "groups": groups,
            })
        };
        let blocks: Vec<_> = self
            .blocks
            .iter()
            .map(|b| match b {
                Block::Plain(g) => block_json(g, false),
                Block::Loop(g) => block_json(g, true),
            })
            .collect();
        let levels: Vec<_> = self
            .levels
            .iter()
            .map(|l| match l {
                LevelDef::Grid { width, height, cells } => json!({
                    "kind": "grid",
                    "width": width,
                    "height": height,
                    "cells": cells,
                }),
                LevelDef::Message(m) => json!({ "kind": "message", "text": m }),
            })
            .collect();
        json!({
            "version": 1,
            "title": self.prelude.title,
            "objects": objects,
            "layers": self.layers.layers,
            "blocks": blocks,
            "late_groups": self.late_groups,
            "win_conditions": self.win_conditions,
            "levels": levels,
            "player_ids": self.player_ids,
            "background_id": self.background_id,
            "has_random": self.has_random,
            "uses_action": self.uses_action,
        })
    }
}

//! Direction expansion of rule lines into runtime rule groups.
//!
//! Each source rule becomes a rule group of 1, 2, or 4 direction
//! variants. Relative force tokens are mapped per variant; kernels for
//! up/down variants read column-wise and left/right variants row-wise,
//! which falls out of stepping cell positions along the variant
//! direction.

use serde::Serialize;
use std::fmt;

use crate::ast::{CellAst, CommandAst, EntryAst, RuleAst};
use crate::diag::{Diagnostic, Section};

use super::{NameKind, Tables};

pub type ObjectId = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

pub const ALL_DIRS: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];

impl Dir {
    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::Up => (-1, 0),
            Dir::Down => (1, 0),
            Dir::Left => (0, -1),
            Dir::Right => (0, 1),
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::Up => Dir::Down,
            Dir::Down => Dir::Up,
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
        }
    }

    /// Rotated 90° counter-clockwise in screen coordinates (`^` relative
    /// to a rule direction).
    pub fn ccw(self) -> Dir {
        match self {
            Dir::Right => Dir::Up,
            Dir::Up => Dir::Left,
            Dir::Left => Dir::Down,
            Dir::Down => Dir::Right,
        }
    }

    /// Rotated 90° clockwise (`v` relative to a rule direction).
    pub fn cw(self) -> Dir {
        self.ccw().opposite()
    }

    pub fn mask(self) -> u8 {
        1 << (self as u8)
    }

    pub fn axis_mask(self) -> u8 {
        match self {
            Dir::Up | Dir::Down => Dir::Up.mask() | Dir::Down.mask(),
            Dir::Left | Dir::Right => Dir::Left.mask() | Dir::Right.mask(),
        }
    }

    pub fn from_index(i: u8) -> Dir {
        ALL_DIRS[i as usize]
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dir::Up => "up",
            Dir::Down => "down",
            Dir::Left => "left",
            Dir::Right => "right",
        };
        f.write_str(s)
    }
}

pub const HORIZONTAL_MASK: u8 = 0b1100;
pub const VERTICAL_MASK: u8 = 0b0011;
pub const ALL_DIR_MASK: u8 = 0b1111;

/// Compiled per-object qualifier of a cell pattern entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Qualifier {
    /// Present with any force state.
    Present,
    /// No member present.
    Absent,
    /// Present with no force bits set.
    Stationary,
    /// Present with exactly this directional force.
    Force(Dir),
    /// Present with any force in the mask; binds the matched direction.
    AnyOf(u8),
    /// Present with the action marker set.
    Action,
    /// Right-hand side only: apply a randomly sampled direction.
    RandomDir,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternEntry {
    /// Atomic ids this reference can stand for (singleton for atomics).
    pub members: Vec<ObjectId>,
    pub qualifier: Qualifier,
    /// For right-hand entries: index of the left-hand entry in the same
    /// cell this entry reuses the match binding of.
    pub bind: Option<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub enum Cell {
    Ellipsis,
    Patterns(Vec<PatternEntry>),
}

pub type Kernel = Vec<Cell>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Command {
    Win,
    Cancel,
    Restart,
    Again,
    Checkpoint,
    Message(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct CompiledRule {
    pub direction: Dir,
    pub lhs: Vec<Kernel>,
    /// `None` for command-only rules, which fire on a bare match.
    pub rhs: Option<Vec<Kernel>>,
    /// Per kernel and cell: left-entry indices deleted by the rewrite.
    #[serde(skip)]
    pub deletes: Vec<Vec<Vec<u8>>>,
    pub commands: Vec<Command>,
    pub is_late: bool,
    pub is_random: bool,
    pub source_line: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleGroup {
    pub rules: Vec<CompiledRule>,
    pub is_late: bool,
    pub is_random: bool,
}

struct RulePrefixes {
    dirs: Vec<Dir>,
    late: bool,
    random: bool,
}

fn parse_prefixes(rule: &RuleAst) -> Result<RulePrefixes, Diagnostic> {
    let mut dirs: Vec<Dir> = Vec::new();
    let mut late = false;
    let mut random = false;
    let push = |dirs: &mut Vec<Dir>, d: Dir| {
        if !dirs.contains(&d) {
            dirs.push(d);
        }
    };
    for p in &rule.prefixes {
        match p.as_str() {
            "late" => late = true,
            "random" => random = true,
            "rigid" => {
                return Err(Diagnostic::error(
                    Some(Section::Rules),
                    rule.line,
                    "the `rigid` keyword is not supported",
                ))
            }
            "up" => push(&mut dirs, Dir::Up),
            "down" => push(&mut dirs, Dir::Down),
            "left" => push(&mut dirs, Dir::Left),
            "right" => push(&mut dirs, Dir::Right),
            "horizontal" => {
                push(&mut dirs, Dir::Left);
                push(&mut dirs, Dir::Right);
            }
            "vertical" => {
                push(&mut dirs, Dir::Up);
                push(&mut dirs, Dir::Down);
            }
            other => {
                return Err(Diagnostic::error(
                    Some(Section::Rules),
                    rule.line,
                    format!("unknown rule prefix `{other}`"),
                ))
            }
        }
    }
    if dirs.is_empty() {
        dirs = ALL_DIRS.to_vec();
    } else {
        // Canonical variant order regardless of prefix spelling order.
        dirs.sort_by_key(|d| *d as u8);
    }
    Ok(RulePrefixes { dirs, late, random })
}

/// True if the rule's meaning depends on the variant direction.
fn has_directional_content(rule: &RuleAst) -> bool {
    let multi_cell = rule.lhs.iter().chain(&rule.rhs).any(|k| k.len() > 1);
    if multi_cell {
        return true;
    }
    let relative = |cell: &CellAst| match cell {
        CellAst::Ellipsis => false,
        CellAst::Entries(es) => es.iter().any(|e| {
            matches!(e.qualifier.as_deref(), Some(">") | Some("<") | Some("^") | Some("v") | Some("parallel") | Some("perpendicular"))
        }),
    };
    rule.lhs.iter().chain(&rule.rhs).flatten().any(relative)
}

/// Expand one source rule line into its direction variants.
pub fn compile_rule(rule: &RuleAst, tables: &Tables) -> Result<RuleGroup, Vec<Diagnostic>> {
    let prefixes = parse_prefixes(rule).map_err(|d| vec![d])?;
    let mut errors = Vec::new();

    let variant_dirs: Vec<Dir> =
        if has_directional_content(rule) { prefixes.dirs.clone() } else { vec![prefixes.dirs[0]] };

    let mut rules = Vec::with_capacity(variant_dirs.len());
    for dir in variant_dirs {
        match compile_variant(rule, dir, tables) {
            Ok(r) => rules.push(CompiledRule {
                is_late: prefixes.late,
                is_random: prefixes.random,
                ..r
            }),
            Err(mut es) => errors.append(&mut es),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(RuleGroup { rules, is_late: prefixes.late, is_random: prefixes.random })
}

fn compile_variant(rule: &RuleAst, dir: Dir, tables: &Tables) -> Result<CompiledRule, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let line = rule.line;

    let lhs: Vec<Kernel> =
        rule.lhs.iter().map(|k| compile_kernel(k, dir, false, tables, line, &mut errors)).collect();
    let mut rhs: Option<Vec<Kernel>> = if rule.rhs.is_empty() {
        None
    } else {
        Some(rule.rhs.iter().map(|k| compile_kernel(k, dir, true, tables, line, &mut errors)).collect())
    };

    for kernel in lhs.iter().chain(rhs.iter().flatten()) {
        check_ellipsis_shape(kernel, line, &mut errors);
    }

    let mut deletes = Vec::new();
    if let Some(rhs) = &mut rhs {
        for (lk, rk) in lhs.iter().zip(rhs.iter()) {
            let mut kernel_deletes = Vec::with_capacity(lk.len());
            for (lc, rc) in lk.iter().zip(rk) {
                match (lc, rc) {
                    (Cell::Ellipsis, Cell::Ellipsis) => kernel_deletes.push(Vec::new()),
                    (Cell::Ellipsis, _) | (_, Cell::Ellipsis) => {
                        errors.push(Diagnostic::error(
                            Some(Section::Rules),
                            line,
                            "`...` on one side without a matching `...` on the other",
                        ));
                        kernel_deletes.push(Vec::new());
                    }
                    (Cell::Patterns(les), Cell::Patterns(_)) => {
                        kernel_deletes.push(compute_deletes(les, rc));
                    }
                }
            }
            deletes.push(kernel_deletes);
        }
        bind_rhs(&lhs, rhs, line, &mut errors);
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    Ok(CompiledRule {
        direction: dir,
        lhs,
        rhs,
        deletes,
        commands: compile_commands(&rule.commands),
        is_late: false,
        is_random: false,
        source_line: line,
    })
}

fn compile_commands(cmds: &[CommandAst]) -> Vec<Command> {
    cmds.iter()
        .filter_map(|c| match c {
            CommandAst::Win => Some(Command::Win),
            CommandAst::Cancel => Some(Command::Cancel),
            CommandAst::Restart => Some(Command::Restart),
            CommandAst::Again => Some(Command::Again),
            CommandAst::Checkpoint => Some(Command::Checkpoint),
            CommandAst::Message(m) => Some(Command::Message(m.clone())),
            CommandAst::Sfx(_) => None, // sounds are parsed and ignored
        })
        .collect()
}

fn compile_kernel(
    kernel: &[CellAst],
    dir: Dir,
    is_rhs: bool,
    tables: &Tables,
    line: usize,
    errors: &mut Vec<Diagnostic>,
) -> Kernel {
    kernel
        .iter()
        .map(|cell| match cell {
            CellAst::Ellipsis => Cell::Ellipsis,
            CellAst::Entries(entries) => {
                Cell::Patterns(entries.iter().filter_map(|e| compile_entry(e, dir, is_rhs, tables, line, errors)).collect())
            }
        })
        .collect()
}

fn compile_entry(
    entry: &EntryAst,
    dir: Dir,
    is_rhs: bool,
    tables: &Tables,
    line: usize,
    errors: &mut Vec<Diagnostic>,
) -> Option<PatternEntry> {
    let (members, kind) = match tables.resolve_name(&entry.name) {
        Some(r) => r,
        None => {
            errors.push(Diagnostic::error(
                Some(Section::Rules),
                line,
                format!("unknown object `{}` in rule", entry.name),
            ));
            return None;
        }
    };
    if kind == NameKind::Aggregate {
        errors.push(Diagnostic::error(
            Some(Section::Rules),
            line,
            format!("aggregate `{}` cannot appear in a rule cell", entry.name),
        ));
        return None;
    }

    let qualifier = match entry.qualifier.as_deref() {
        None => Qualifier::Present,
        Some("no") => Qualifier::Absent,
        Some(">") => Qualifier::Force(dir),
        Some("<") => Qualifier::Force(dir.opposite()),
        Some("^") => Qualifier::Force(dir.ccw()),
        Some("v") => Qualifier::Force(dir.cw()),
        Some("up") => Qualifier::Force(Dir::Up),
        Some("down") => Qualifier::Force(Dir::Down),
        Some("left") => Qualifier::Force(Dir::Left),
        Some("right") => Qualifier::Force(Dir::Right),
        Some("moving") => Qualifier::AnyOf(ALL_DIR_MASK),
        Some("horizontal") => Qualifier::AnyOf(HORIZONTAL_MASK),
        Some("vertical") => Qualifier::AnyOf(VERTICAL_MASK),
        Some("parallel") => Qualifier::AnyOf(dir.axis_mask()),
        Some("perpendicular") => Qualifier::AnyOf(dir.ccw().axis_mask()),
        Some("stationary") => Qualifier::Stationary,
        Some("action") => Qualifier::Action,
        Some("randomdir") => {
            if !is_rhs {
                errors.push(Diagnostic::error(
                    Some(Section::Rules),
                    line,
                    "`randomdir` is only meaningful on the right-hand side",
                ));
                return None;
            }
            Qualifier::RandomDir
        }
        Some("rigid") => {
            errors.push(Diagnostic::error(Some(Section::Rules), line, "the `rigid` keyword is not supported"));
            return None;
        }
        Some(other) => {
            errors.push(Diagnostic::error(Some(Section::Rules), line, format!("unknown qualifier `{other}`")));
            return None;
        }
    };

    Some(PatternEntry { members, qualifier, bind: None })
}

fn check_ellipsis_shape(kernel: &Kernel, line: usize, errors: &mut Vec<Diagnostic>) {
    let n = kernel.len();
    for (i, cell) in kernel.iter().enumerate() {
        if matches!(cell, Cell::Ellipsis) {
            if i == 0 || i + 1 == n {
                errors.push(Diagnostic::error(
                    Some(Section::Rules),
                    line,
                    "`...` needs pattern cells on both sides",
                ));
            } else if matches!(kernel[i - 1], Cell::Ellipsis) {
                errors.push(Diagnostic::error(Some(Section::Rules), line, "consecutive `...` cells"));
            }
        }
    }
}

/// Left entries that no right entry re-mentions get deleted on apply.
fn compute_deletes(lhs_entries: &[PatternEntry], rhs_cell: &Cell) -> Vec<u8> {
    let Cell::Patterns(rhs_entries) = rhs_cell else { return Vec::new() };
    let mut out = Vec::new();
    for (i, le) in lhs_entries.iter().enumerate() {
        if le.qualifier == Qualifier::Absent {
            continue;
        }
        let kept = rhs_entries
            .iter()
            .any(|re| re.qualifier != Qualifier::Absent && re.members == le.members);
        if !kept {
            out.push(i as u8);
        }
    }
    out
}

/// Resolve right-hand bindings: a right entry reuses the match of the
/// left entry at the same kernel/cell position with the same member set.
fn bind_rhs(lhs: &[Kernel], rhs: &mut [Kernel], line: usize, errors: &mut Vec<Diagnostic>) {
    for (lk, rk) in lhs.iter().zip(rhs.iter_mut()) {
        for (lc, rc) in lk.iter().zip(rk.iter_mut()) {
            let (Cell::Patterns(les), Cell::Patterns(res)) = (lc, rc) else { continue };
            for re in res.iter_mut() {
                let found = les.iter().position(|le| {
                    le.qualifier != Qualifier::Absent && le.members == re.members
                });
                re.bind = found.map(|i| i as u8);
                let needs_binding = match re.qualifier {
                    Qualifier::Absent => false,
                    Qualifier::AnyOf(_) => true,
                    _ => re.members.len() > 1,
                };
                if needs_binding && re.bind.is_none() {
                    errors.push(Diagnostic::error(
                        Some(Section::Rules),
                        line,
                        "unbound property: right-hand reference has no matching left-hand entry in the same cell",
                    ));
                }
            }
        }
    }
}

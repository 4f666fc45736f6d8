//! Abstract syntax tree for a parsed game file, before name resolution.

use crate::color::Color;

/// Everything the parser extracts; section order is preserved as written.
#[derive(Debug, Clone, Default)]
pub struct GameAst {
    pub prelude: Vec<PreludeEntry>,
    pub objects: Vec<ObjectDecl>,
    pub legend: Vec<LegendDecl>,
    /// The sounds section is retained verbatim and never interpreted.
    pub sounds: Vec<String>,
    pub collision_layers: Vec<LayerDecl>,
    pub rule_lines: Vec<RuleLine>,
    pub win_conditions: Vec<WinConditionAst>,
    pub levels: Vec<LevelEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreludeEntry {
    pub key: String,
    pub value: Option<String>,
    pub line: usize,
}

impl GameAst {
    pub fn prelude_flag(&self, key: &str) -> bool {
        self.prelude.iter().any(|p| p.key == key)
    }

    pub fn prelude_value(&self, key: &str) -> Option<&str> {
        self.prelude.iter().find(|p| p.key == key).and_then(|p| p.value.as_deref())
    }
}

#[derive(Debug, Clone)]
pub struct ObjectDecl {
    pub name: String,
    /// Single-character shorthand declared on the object's name line.
    pub glyph: Option<char>,
    pub colors: Vec<Color>,
    /// 5×5 grid of palette indices; `None` pixels are transparent.
    pub sprite: Option<Vec<Vec<Option<u8>>>>,
    pub line: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LegendOp {
    /// `A = B` — simple alias.
    Alias,
    /// `A = B or C` — disjunctive meta-object.
    Or,
    /// `A = B and C` — conjunctive aggregate.
    And,
}

#[derive(Debug, Clone)]
pub struct LegendDecl {
    pub name: String,
    pub op: LegendOp,
    pub parts: Vec<String>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct LayerDecl {
    pub names: Vec<String>,
    pub line: usize,
}

/// A rule line as written, before direction expansion.
#[derive(Debug, Clone)]
pub enum RuleLine {
    StartLoop { line: usize },
    EndLoop { line: usize },
    Rule(RuleAst),
}

#[derive(Debug, Clone)]
pub struct RuleAst {
    /// `late`, `random`, `rigid`, direction restrictions — kept as written.
    pub prefixes: Vec<String>,
    /// `+` continuation: joins this rule into the preceding group.
    pub plus: bool,
    pub lhs: Vec<KernelAst>,
    /// Empty for command-only rules.
    pub rhs: Vec<KernelAst>,
    pub commands: Vec<CommandAst>,
    pub line: usize,
}

/// One `[ ... ]` pattern: a sequence of cells.
pub type KernelAst = Vec<CellAst>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CellAst {
    /// `...` — line detector occupying a cell of its own.
    Ellipsis,
    /// Qualifier/object token pairs, e.g. `> Player`, `no Crate`.
    Entries(Vec<EntryAst>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryAst {
    /// Qualifier token as written (`>`, `<`, `^`, `v`, `up`, `no`,
    /// `stationary`, `moving`, `action`, ...), if any.
    pub qualifier: Option<String>,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandAst {
    Win,
    Cancel,
    Restart,
    Again,
    Checkpoint,
    Message(String),
    /// `sfxN` — parsed and ignored.
    Sfx(u8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WinKindAst {
    AllOn,
    SomeOn,
    NoOn,
    Some,
    None,
}

#[derive(Debug, Clone)]
pub struct WinConditionAst {
    pub kind: WinKindAst,
    pub a: String,
    pub b: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub enum LevelEntry {
    /// Rectangular glyph grid (ragged rows padded by the parser).
    Grid { rows: Vec<Vec<char>>, line: usize },
    Message { text: String, line: usize },
}

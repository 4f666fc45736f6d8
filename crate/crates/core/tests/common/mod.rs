//! Shared helpers for integration suites.
#![allow(dead_code)]

use pz_core::compile::GameDef;
use pz_core::engine::{self, Action, EngineLimits, GridState, StepOutcome};

pub fn compile(text: &str) -> GameDef {
    pz_core::compile_source(text).expect("game compiles").game
}

pub fn game_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../games").join(name)
}

pub fn load_game(name: &str) -> GameDef {
    let text = std::fs::read_to_string(game_path(name)).expect("corpus game exists");
    compile(&text)
}

pub fn load_game_text(name: &str) -> String {
    std::fs::read_to_string(game_path(name)).expect("corpus game exists")
}

pub fn limits() -> EngineLimits {
    EngineLimits::default()
}

pub fn init(game: &GameDef, level: usize) -> GridState {
    engine::init_level(game, level, &limits()).expect("init").0
}

pub fn tick(game: &GameDef, state: &GridState, action: Action) -> (GridState, StepOutcome) {
    engine::tick(game, state, action, &limits()).expect("tick")
}

/// Run a sequence of actions given as `u`/`d`/`l`/`r`/`x`/`n` characters.
pub fn run(game: &GameDef, state: &GridState, moves: &str) -> (GridState, StepOutcome) {
    let mut current = state.clone();
    let mut last = StepOutcome::default();
    for ch in moves.chars() {
        let action = match ch {
            'u' => Action::Up,
            'd' => Action::Down,
            'l' => Action::Left,
            'r' => Action::Right,
            'x' => Action::Act,
            'n' => Action::None,
            _ => panic!("bad move char {ch}"),
        };
        let (next, outcome) = tick(game, &current, action);
        current = next;
        last = outcome;
    }
    (current, last)
}

/// Presence digest of a state built from ASCII rows (see
/// [`GridState::from_glyph_rows`]).
pub fn digest_of_rows(game: &GameDef, rows: &[&str], extra: &[(char, &str)]) -> u64 {
    GridState::from_glyph_rows(game, rows, extra).expect("rows build").digest()
}

/// A compact sokoban-flavored game for probes; rules can be swapped in.
pub fn probe_game(rules: &str, win: &str, level: &str) -> String {
    format!(
        "\
OBJECTS
Background
black

Wall
brown

Player
red

Crate
orange

Gem
blue

Target
green
LEGEND
. = Background
# = Wall
P = Player
C = Crate
G = Gem
O = Target
COLLISIONLAYERS
Background
Target
Gem
Player, Wall, Crate
RULES
{rules}
WINCONDITIONS
{win}
LEVELS
{level}
"
    )
}

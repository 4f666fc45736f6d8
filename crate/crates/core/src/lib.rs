//! Compiler, deterministic simulation engine, solver, and benchmarking
//! toolkit for tile-based puzzle games written in the PuzzleScript
//! description language.
//!
//! The pipeline is: [`SourceText`] → [`preprocess`] → [`parse`] →
//! [`compile_game`] → [`GameDef`], after which any number of engine
//! instances may run ticks against independent [`GridState`] values.
//! On top of the engine sit the agent-facing episode API ([`env`]),
//! a breadth-first solver with replay validation ([`solver`]), and a
//! throughput/validation harness ([`harness`]).

pub mod ast;
pub mod color;
pub mod compile;
pub mod diag;
pub mod engine;
pub mod env;
pub mod harness;
pub mod parse;
pub mod render;
pub mod solver;
pub mod source;

pub use ast::GameAst;
pub use compile::{compile_game, Compiled, GameDef};
pub use diag::{Diagnostic, Diagnostics, Severity};
pub use engine::{Action, EngineLimits, GridState, StepOutcome};
pub use parse::parse;
pub use source::{preprocess, SourceText};

/// Preprocess, parse, and compile a raw game file in one step.
pub fn compile_source(text: &str) -> Result<Compiled, Diagnostics> {
    let src = SourceText::new(text);
    let pre = preprocess(&src).map_err(|d| Diagnostics::from(vec![d]))?;
    let parsed = parse(&pre)?;
    let mut compiled = compile_game(&parsed.ast)?;
    compiled.warnings.splice(0..0, parsed.warnings);
    Ok(compiled)
}

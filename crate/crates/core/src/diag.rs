//! Structured diagnostics for the compile pipeline.
//!
//! Every diagnostic carries a 1-based line number into the original
//! (pre-normalization) source so editors can jump straight to it.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// The eight file sections plus the prelude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Prelude,
    Objects,
    Legend,
    Sounds,
    CollisionLayers,
    Rules,
    WinConditions,
    Levels,
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Section::Prelude => "prelude",
            Section::Objects => "objects",
            Section::Legend => "legend",
            Section::Sounds => "sounds",
            Section::CollisionLayers => "collisionlayers",
            Section::Rules => "rules",
            Section::WinConditions => "winconditions",
            Section::Levels => "levels",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub section: Option<Section>,
    /// 1-based line in the original source.
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    pub fn error(section: Option<Section>, line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, section, line, message: message.into() }
    }

    pub fn warning(section: Option<Section>, line: usize, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, section, line, message: message.into() }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.section {
            Some(sec) => write!(f, "{}: line {} ({}): {}", sev, self.line, sec, self.message),
            None => write!(f, "{}: line {}: {}", sev, self.line, self.message),
        }
    }
}

/// A bundle of diagnostics, used as the error type of the compile pipeline.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Diagnostics(pub Vec<Diagnostic>);

impl Diagnostics {
    pub fn new() -> Self {
        Diagnostics(Vec::new())
    }

    pub fn push(&mut self, d: Diagnostic) {
        self.0.push(d);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.0.iter().any(|d| d.severity == Severity::Error)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Diagnostic> {
        self.0.iter()
    }

    /// Serialize as a JSON array of `{severity, section, line, message}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.0).expect("diagnostics serialize")
    }

    /// Split into (errors, warnings).
    pub fn partition(self) -> (Vec<Diagnostic>, Vec<Diagnostic>) {
        self.0.into_iter().partition(|d| d.severity == Severity::Error)
    }
}

impl From<Vec<Diagnostic>> for Diagnostics {
    fn from(v: Vec<Diagnostic>) -> Self {
        Diagnostics(v)
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", d)?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostics {}

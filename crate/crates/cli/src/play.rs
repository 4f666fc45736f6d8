//! Interactive terminal play — a debugging aid, not a product surface.
//!
//! Arrow keys move, X is the action key, Z undoes one tick, R restarts,
//! Q quits. Without a TTY it falls back to line input (u/d/l/r/x/z/R/q).

use std::io::{BufRead, IsTerminal, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use crossterm::event::{Event, KeyCode, KeyEvent, KeyModifiers};

use pz_core::compile::{GameDef, LevelDef, NameKind};
use pz_core::engine::{self, Action, EngineLimits, GridState};

pub fn cmd_play(file: &Path, level: usize, seed: Option<u64>) -> Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let compiled = pz_core::compile_source(&text).map_err(|d| anyhow!("compile failed:\n{d}"))?;
    let game = &compiled.game;

    if let Some(LevelDef::Message(m)) = game.levels.get(level) {
        println!("level {level} is a message: {m}");
        return Ok(());
    }
    let limits = EngineLimits { rng_seed: seed.or(game.has_random.then_some(0)), ..EngineLimits::default() };
    let (state, outcome) = engine::init_level(game, level, &limits).map_err(|e| anyhow!("{e}"))?;

    let mut session = Session {
        game,
        limits,
        level,
        state,
        undo_stack: Vec::new(),
        status: if outcome.won { "won on level start".into() } else { String::new() },
        won: outcome.won,
    };

    if std::io::stdin().is_terminal() {
        interactive(&mut session)
    } else {
        line_mode(&mut session)
    }
}

struct Session<'a> {
    game: &'a GameDef,
    limits: EngineLimits,
    level: usize,
    state: GridState,
    undo_stack: Vec<GridState>,
    status: String,
    won: bool,
}

impl Session<'_> {
    fn step(&mut self, action: Action) {
        if self.won {
            self.status = "already won; R to restart".into();
            return;
        }
        match engine::tick(self.game, &self.state, action, &self.limits) {
            Ok((next, outcome)) => {
                self.undo_stack.push(std::mem::replace(&mut self.state, next));
                self.won = outcome.won;
                self.status = format!(
                    "changed={} won={}{}{}",
                    outcome.changed,
                    outcome.won,
                    if outcome.messages.is_empty() {
                        String::new()
                    } else {
                        format!(" message: {}", outcome.messages.join(" | "))
                    },
                    if outcome.again_ticks_used > 0 {
                        format!(" again×{}", outcome.again_ticks_used)
                    } else {
                        String::new()
                    }
                );
            }
            Err(e) => self.status = format!("engine error: {e}"),
        }
    }

    fn undo(&mut self) {
        match self.undo_stack.pop() {
            Some(prev) => {
                self.state = prev;
                self.won = false;
                self.status = "undid one tick".into();
            }
            None => self.status = "nothing to undo".into(),
        }
    }

    fn restart(&mut self) {
        if let Ok((fresh, _)) = engine::init_level(self.game, self.level, &self.limits) {
            self.undo_stack.push(std::mem::replace(&mut self.state, fresh));
            self.won = false;
            self.status = "restarted".into();
        }
    }

    fn draw(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "{}", ascii_grid(self.game, &self.state).join("\r\n"))?;
        writeln!(out, "\r[arrows/udlr] move  [x] action  [z] undo  [R] restart  [q] quit")?;
        if !self.status.is_empty() {
            writeln!(out, "\r{}", self.status)?;
        }
        if self.won {
            if std::env::var_os("NO_COLOR").is_none() {
                writeln!(out, "\r\x1b[32m*** WIN ***\x1b[0m")?;
            } else {
                writeln!(out, "\r*** WIN ***")?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Render cells by legend glyph: the glyph whose member set equals the
/// cell's non-background content, else `?` for unrepresentable mixes.
fn ascii_grid(game: &GameDef, state: &GridState) -> Vec<String> {
    // Prefer deterministic glyph choice: sort by glyph char.
    let mut glyphs: Vec<(char, Vec<u16>, NameKind)> = game
        .legend
        .glyphs
        .iter()
        .map(|(c, e)| (*c, e.members.clone(), e.kind))
        .collect();
    glyphs.sort_by_key(|(c, _, _)| *c);

    let bg = game.background_id;
    let mut rows = Vec::with_capacity(state.height as usize);
    for r in 0..state.height as usize {
        let mut row = String::with_capacity(state.width as usize);
        for c in 0..state.width as usize {
            let cell = state.cell_index(r, c);
            let mut ids: Vec<u16> = (0..game.objects.len() as u16)
                .filter(|&o| o != bg && state.has_object(o, cell))
                .collect();
            ids.sort_unstable();
            let glyph = if ids.is_empty() {
                glyphs
                    .iter()
                    .find(|(_, m, _)| m.as_slice() == [bg])
                    .map(|(g, _, _)| *g)
                    .unwrap_or('.')
            } else {
                glyphs
                    .iter()
                    .find(|(_, m, _)| m.as_slice() == ids.as_slice())
                    .or_else(|| {
                        // Single-object fallback regardless of kind.
                        if ids.len() == 1 {
                            glyphs.iter().find(|(_, m, _)| m.as_slice() == ids.as_slice())
                        } else {
                            None
                        }
                    })
                    .map(|(g, _, _)| *g)
                    .unwrap_or('?')
            };
            row.push(glyph);
        }
        rows.push(row);
    }
    rows
}

fn interactive(session: &mut Session) -> Result<()> {
    use crossterm::{cursor, execute, terminal};
    let mut out = std::io::stdout();
    terminal::enable_raw_mode()?;
    let result = (|| -> Result<()> {
        loop {
            execute!(out, terminal::Clear(terminal::ClearType::All), cursor::MoveTo(0, 0))?;
            session.draw(&mut out)?;
            let Event::Key(KeyEvent { code, modifiers, .. }) = crossterm::event::read()? else {
                continue;
            };
            match code {
                KeyCode::Up => session.step(Action::Up),
                KeyCode::Down => session.step(Action::Down),
                KeyCode::Left => session.step(Action::Left),
                KeyCode::Right => session.step(Action::Right),
                KeyCode::Char('x') | KeyCode::Char('X') => session.step(Action::Act),
                KeyCode::Char('z') => session.undo(),
                KeyCode::Char('r') | KeyCode::Char('R') => session.restart(),
                KeyCode::Char('q') | KeyCode::Esc => break,
                KeyCode::Char('c') if modifiers.contains(KeyModifiers::CONTROL) => break,
                _ => {}
            }
        }
        Ok(())
    })();
    crossterm::terminal::disable_raw_mode()?;
    println!();
    result
}

fn line_mode(session: &mut Session) -> Result<()> {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    session.draw(&mut out)?;
    for line in stdin.lock().lines() {
        let line = line?;
        for ch in line.trim().chars() {
            match ch {
                'u' => session.step(Action::Up),
                'd' => session.step(Action::Down),
                'l' => session.step(Action::Left),
                'r' => session.step(Action::Right),
                'x' => session.step(Action::Act),
                'z' => session.undo(),
                'R' => session.restart(),
                'q' => return Ok(()),
                _ => {}
            }
        }
        session.draw(&mut out)?;
    }
    Ok(())
}

//! Parser: preprocessed source text → [`GameAst`].
//!
//! The file is split into its eight sections by keyword header lines
//! (`====` divider lines are optional), then each section is parsed
//! line by line. All diagnostics carry original line numbers.

use crate::ast::*;
use crate::color::parse_color;
use crate::diag::{Diagnostic, Diagnostics, Section};
use crate::source::SourceText;

#[derive(Debug)]
pub struct Parsed {
    pub ast: GameAst,
    pub warnings: Vec<Diagnostic>,
}

struct Ctx {
    errors: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
}

impl Ctx {
    fn error(&mut self, section: Section, line: usize, msg: impl Into<String>) {
        self.errors.push(Diagnostic::error(Some(section), line, msg));
    }
}

/// Parse a preprocessed source into an AST covering all eight sections.
pub fn parse(source: &SourceText) -> Result<Parsed, Diagnostics> {
    let mut ctx = Ctx { errors: Vec::new(), warnings: Vec::new() };
    let mut ast = GameAst::default();

    let mut section_lines: Vec<(Section, Vec<(usize, String)>)> = vec![(Section::Prelude, Vec::new())];

    for (line_no, text) in source.lines() {
        let trimmed = text.trim();
        if is_divider(trimmed) {
            continue;
        }
        if let Some(next) = section_keyword(trimmed) {
            section_lines.push((next, Vec::new()));
            continue;
        }
        section_lines.last_mut().unwrap().1.push((line_no, text.to_string()));
    }

    for (section, lines) in &section_lines {
        match section {
            Section::Prelude => parse_prelude(lines, &mut ast, &mut ctx),
            Section::Objects => parse_objects(lines, &mut ast, &mut ctx),
            Section::Legend => parse_legend(lines, &mut ast, &mut ctx),
            Section::Sounds => {
                ast.sounds.extend(lines.iter().filter(|(_, t)| !t.trim().is_empty()).map(|(_, t)| t.clone()))
            }
            Section::CollisionLayers => parse_layers(lines, &mut ast, &mut ctx),
            Section::Rules => parse_rules(lines, &mut ast, &mut ctx),
            Section::WinConditions => parse_win_conditions(lines, &mut ast, &mut ctx),
            Section::Levels => parse_levels(lines, &mut ast, &mut ctx),
        }
    }

    check_rule_shapes(&ast, &mut ctx);
    pad_levels(&mut ast, &mut ctx);

    if ctx.errors.is_empty() {
        Ok(Parsed { ast, warnings: ctx.warnings })
    } else {
        let mut all = ctx.errors;
        all.extend(ctx.warnings);
        Err(Diagnostics(all))
    }
}

fn is_divider(trimmed: &str) -> bool {
    trimmed.len() >= 3 && trimmed.chars().all(|c| c == '=')
}

fn section_keyword(trimmed: &str) -> Option<Section> {
    match trimmed {
        "objects" => Some(Section::Objects),
        "legend" => Some(Section::Legend),
        "sounds" => Some(Section::Sounds),
        "collisionlayers" => Some(Section::CollisionLayers),
        "rules" => Some(Section::Rules),
        "winconditions" => Some(Section::WinConditions),
        "levels" => Some(Section::Levels),
        _ => None,
    }
}

fn parse_prelude(lines: &[(usize, String)], ast: &mut GameAst, _ctx: &mut Ctx) {
    for (line_no, text) in lines {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (key, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((k, r)) => (k.to_string(), Some(r.trim().to_string())),
            None => (trimmed.to_string(), None),
        };
        let value = rest.filter(|r| !r.is_empty());
        ast.prelude.push(PreludeEntry { key, value, line: *line_no });
    }
}

fn is_sprite_row(trimmed: &str) -> bool {
    !trimmed.is_empty() && trimmed.chars().all(|c| c == '.' || c.is_ascii_digit())
}

fn parse_objects(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    let mut i = 0;
    while i < lines.len() {
        let (line_no, text) = &lines[i];
        let trimmed = text.trim();
        if trimmed.is_empty() {
            i += 1;
            continue;
        }

        // Name line, optionally followed by a glyph shorthand.
        let mut toks = trimmed.split_whitespace();
        let name = toks.next().unwrap().to_string();
        let glyph_tok = toks.next();
        if let Some(extra) = toks.next() {
            ctx.error(Section::Objects, *line_no, format!("unexpected token `{extra}` after object name"));
        }
        let glyph = match glyph_tok {
            Some(g) if g.chars().count() == 1 => Some(g.chars().next().unwrap()),
            Some(g) => {
                ctx.error(Section::Objects, *line_no, format!("object glyph `{g}` must be a single character"));
                None
            }
            None => None,
        };
        if ast.objects.iter().any(|o| o.name == name) {
            ctx.error(Section::Objects, *line_no, format!("duplicate object name `{name}`"));
        }
        let decl_line = *line_no;
        i += 1;

        // Colors line.
        let mut colors = Vec::new();
        if i < lines.len() && !lines[i].1.trim().is_empty() {
            let (cline, ctext) = &lines[i];
            for word in ctext.split_whitespace() {
                match parse_color(word) {
                    Some(c) => colors.push(c),
                    None => ctx.error(Section::Objects, *cline, format!("unknown color `{word}`")),
                }
            }
            i += 1;
        } else {
            ctx.error(Section::Objects, decl_line, format!("object `{name}` is missing a colors line"));
        }

        // Sprite rows.
        let mut rows: Vec<(usize, String)> = Vec::new();
        while i < lines.len() {
            let (rline, rtext) = &lines[i];
            let rt = rtext.trim();
            if is_sprite_row(rt) {
                rows.push((*rline, rt.to_string()));
                i += 1;
            } else {
                break;
            }
        }
        let sprite = if rows.is_empty() {
            None
        } else if rows.len() != 5 || rows.iter().any(|(_, r)| r.chars().count() != 5) {
            ctx.error(
                Section::Objects,
                rows[0].0,
                format!("object `{name}` sprite must be exactly 5×5 (got {} rows)", rows.len()),
            );
            None
        } else {
            let mut grid = Vec::with_capacity(5);
            for (rline, row) in &rows {
                let mut out = Vec::with_capacity(5);
                for ch in row.chars() {
                    if ch == '.' {
                        out.push(None);
                    } else {
                        let idx = ch.to_digit(10).unwrap() as u8;
                        if (idx as usize) >= colors.len() {
                            ctx.error(
                                Section::Objects,
                                *rline,
                                format!("sprite index {idx} out of range for `{name}` ({} colors)", colors.len()),
                            );
                        }
                        out.push(Some(idx));
                    }
                }
                grid.push(out);
            }
            Some(grid)
        };

        ast.objects.push(ObjectDecl { name, glyph, colors, sprite, line: decl_line });
    }
}

fn parse_legend(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    for (line_no, text) in lines {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = trimmed.split_once('=') else {
            ctx.error(Section::Legend, *line_no, "legend line must look like `Name = A or B`");
            continue;
        };
        let name = lhs.trim().to_string();
        if name.is_empty() || name.split_whitespace().count() != 1 {
            ctx.error(Section::Legend, *line_no, "legend name must be a single word or character");
            continue;
        }
        let toks: Vec<&str> = rhs.split_whitespace().collect();
        if toks.is_empty() {
            ctx.error(Section::Legend, *line_no, "legend definition is empty");
            continue;
        }
        let mut parts = vec![toks[0].to_string()];
        let mut op: Option<LegendOp> = None;
        let mut k = 1;
        let mut bad = false;
        while k + 1 < toks.len() + 1 && k < toks.len() {
            let this_op = match toks[k] {
                "or" => LegendOp::Or,
                "and" => LegendOp::And,
                other => {
                    ctx.error(Section::Legend, *line_no, format!("expected `or`/`and`, found `{other}`"));
                    bad = true;
                    break;
                }
            };
            match op {
                None => op = Some(this_op),
                Some(prev) if prev != this_op => {
                    ctx.error(Section::Legend, *line_no, "cannot mix `and` and `or` in one legend definition");
                    bad = true;
                    break;
                }
                _ => {}
            }
            if k + 1 >= toks.len() {
                ctx.error(Section::Legend, *line_no, "legend definition ends with an operator");
                bad = true;
                break;
            }
            parts.push(toks[k + 1].to_string());
            k += 2;
        }
        if bad {
            continue;
        }
        ast.legend.push(LegendDecl { name, op: op.unwrap_or(LegendOp::Alias), parts, line: *line_no });
    }
}

fn parse_layers(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    for (line_no, text) in lines {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let names: Vec<String> =
            trimmed.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(String::from).collect();
        if names.is_empty() {
            ctx.error(Section::CollisionLayers, *line_no, "empty collision layer line");
            continue;
        }
        ast.collision_layers.push(LayerDecl { names, line: *line_no });
    }
}

// ---------------------------------------------------------------------------
// Rules
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
struct Tok {
    text: String,
    /// Byte offset into the line, for `message` tail extraction.
    at: usize,
}

fn tokenize_rule(line: &str) -> Vec<Tok> {
    let bytes = line.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
        } else if b == b'-' && i + 1 < bytes.len() && bytes[i + 1] == b'>' {
            toks.push(Tok { text: "->".into(), at: i });
            i += 2;
        } else if matches!(b, b'[' | b']' | b'|' | b'+' | b'>' | b'<' | b'^') {
            toks.push(Tok { text: (b as char).to_string(), at: i });
            i += 1;
        } else if b == b'.' {
            let start = i;
            while i < bytes.len() && bytes[i] == b'.' {
                i += 1;
            }
            toks.push(Tok { text: line[start..i].into(), at: start });
        } else {
            let start = i;
            while i < bytes.len() {
                let c = bytes[i];
                if c.is_ascii_whitespace() || matches!(c, b'[' | b']' | b'|' | b'.' | b'>' | b'<' | b'^') {
                    break;
                }
                if c == b'-' && i + 1 < bytes.len() && bytes[i + 1] == b'>' {
                    break;
                }
                i += 1;
            }
            toks.push(Tok { text: line[start..i].into(), at: start });
        }
    }
    toks
}

const RULE_PREFIXES: [&str; 9] =
    ["late", "random", "rigid", "up", "down", "left", "right", "horizontal", "vertical"];

const CELL_QUALIFIERS: [&str; 18] = [
    ">", "<", "^", "v", "up", "down", "left", "right", "horizontal", "vertical", "no", "stationary", "moving",
    "action", "randomdir", "parallel", "perpendicular", "rigid",
];

fn parse_rules(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    let mut i = 0;
    while i < lines.len() {
        let (line_no, text) = &lines[i];
        i += 1;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed {
            "startloop" => {
                ast.rule_lines.push(RuleLine::StartLoop { line: *line_no });
                continue;
            }
            "endloop" => {
                ast.rule_lines.push(RuleLine::EndLoop { line: *line_no });
                continue;
            }
            _ => {}
        }
        // A rule line ending in `->` continues on the next line.
        let mut joined = text.clone();
        while joined.trim_end().ends_with("->") && i < lines.len() {
            joined.push(' ');
            joined.push_str(&lines[i].1);
            i += 1;
        }
        if let Some(rule) = parse_rule_line(*line_no, &joined, ctx) {
            ast.rule_lines.push(RuleLine::Rule(rule));
        }
    }
}

fn parse_rule_line(line_no: usize, text: &str, ctx: &mut Ctx) -> Option<RuleAst> {
    let toks = tokenize_rule(text);
    let mut pos = 0;

    let plus = toks.first().map(|t| t.text == "+").unwrap_or(false);
    if plus {
        pos += 1;
    }

    let mut prefixes = Vec::new();
    while pos < toks.len() && toks[pos].text != "[" {
        let t = &toks[pos].text;
        if RULE_PREFIXES.contains(&t.as_str()) {
            prefixes.push(t.clone());
            pos += 1;
        } else {
            ctx.error(Section::Rules, line_no, format!("unknown rule prefix `{t}`"));
            return None;
        }
    }

    let lhs = parse_kernels(&toks, &mut pos, line_no, ctx)?;
    if lhs.is_empty() {
        ctx.error(Section::Rules, line_no, "rule has no left-hand pattern");
        return None;
    }

    if pos >= toks.len() || toks[pos].text != "->" {
        ctx.error(Section::Rules, line_no, "expected `->` after left-hand pattern");
        return None;
    }
    pos += 1;

    let rhs = parse_kernels(&toks, &mut pos, line_no, ctx)?;

    // Remaining tokens are commands.
    let mut commands = Vec::new();
    while pos < toks.len() {
        let t = &toks[pos];
        let cmd = match t.text.as_str() {
            "win" => CommandAst::Win,
            "cancel" => CommandAst::Cancel,
            "restart" => CommandAst::Restart,
            "again" => CommandAst::Again,
            "checkpoint" => CommandAst::Checkpoint,
            "message" => {
                let tail_at = t.at + "message".len();
                let tail = text.get(tail_at..).unwrap_or("").trim().to_string();
                commands.push(CommandAst::Message(tail));
                break;
            }
            s if s.starts_with("sfx") => match s[3..].parse::<u8>() {
                Ok(n) if n <= 10 => CommandAst::Sfx(n),
                _ => {
                    ctx.error(Section::Rules, line_no, format!("malformed sound command `{s}`"));
                    return None;
                }
            },
            other => {
                ctx.error(Section::Rules, line_no, format!("unexpected token `{other}` after rule"));
                return None;
            }
        };
        commands.push(cmd);
        pos += 1;
    }

    Some(RuleAst { prefixes, plus, lhs, rhs, commands, line: line_no })
}

fn parse_kernels(toks: &[Tok], pos: &mut usize, line_no: usize, ctx: &mut Ctx) -> Option<Vec<KernelAst>> {
    let mut kernels = Vec::new();
    while *pos < toks.len() && toks[*pos].text == "[" {
        *pos += 1;
        let mut kernel: KernelAst = Vec::new();
        let mut cell_toks: Vec<String> = Vec::new();
        loop {
            if *pos >= toks.len() {
                ctx.error(Section::Rules, line_no, "unterminated `[` pattern");
                return None;
            }
            let t = toks[*pos].text.clone();
            *pos += 1;
            match t.as_str() {
                "|" => {
                    kernel.push(finish_cell(std::mem::take(&mut cell_toks), line_no, ctx)?);
                }
                "]" => {
                    kernel.push(finish_cell(std::mem::take(&mut cell_toks), line_no, ctx)?);
                    break;
                }
                _ => cell_toks.push(t),
            }
        }
        // `[ ]` is a single empty cell, not zero cells.
        kernels.push(kernel);
    }
    Some(kernels)
}

fn finish_cell(toks: Vec<String>, line_no: usize, ctx: &mut Ctx) -> Option<CellAst> {
    if toks.len() == 1 && toks[0].chars().all(|c| c == '.') && toks[0].len() >= 2 {
        return Some(CellAst::Ellipsis);
    }
    let mut entries = Vec::new();
    let mut pending_qualifier: Option<String> = None;
    for t in toks {
        if t.chars().all(|c| c == '.') && t.len() >= 2 {
            ctx.error(Section::Rules, line_no, "`...` must occupy a cell of its own");
            return None;
        }
        if pending_qualifier.is_none() && CELL_QUALIFIERS.contains(&t.as_str()) {
            pending_qualifier = Some(t);
        } else {
            entries.push(EntryAst { qualifier: pending_qualifier.take(), name: t });
        }
    }
    if let Some(q) = pending_qualifier {
        // A trailing qualifier token with no object: treat tokens like `v`
        // as object names only when nothing else fits.
        entries.push(EntryAst { qualifier: None, name: q });
    }
    Some(CellAst::Entries(entries))
}

fn check_rule_shapes(ast: &GameAst, ctx: &mut Ctx) {
    for line in &ast.rule_lines {
        let RuleLine::Rule(rule) = line else { continue };
        if rule.rhs.is_empty() {
            continue;
        }
        if rule.lhs.len() != rule.rhs.len() {
            ctx.error(
                Section::Rules,
                rule.line,
                format!("rule has {} left kernels but {} right kernels", rule.lhs.len(), rule.rhs.len()),
            );
            continue;
        }
        for (l, r) in rule.lhs.iter().zip(&rule.rhs) {
            if l.len() != r.len() {
                ctx.error(
                    Section::Rules,
                    rule.line,
                    format!("kernel length mismatch: left has {} cells, right has {}", l.len(), r.len()),
                );
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Win conditions and levels
// ---------------------------------------------------------------------------

fn parse_win_conditions(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    for (line_no, text) in lines {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        let cond = match toks.as_slice() {
            ["all", a, "on", b] => WinConditionAst {
                kind: WinKindAst::AllOn,
                a: a.to_string(),
                b: Some(b.to_string()),
                line: *line_no,
            },
            ["some" | "any", a, "on", b] => WinConditionAst {
                kind: WinKindAst::SomeOn,
                a: a.to_string(),
                b: Some(b.to_string()),
                line: *line_no,
            },
            ["no", a, "on", b] => WinConditionAst {
                kind: WinKindAst::NoOn,
                a: a.to_string(),
                b: Some(b.to_string()),
                line: *line_no,
            },
            ["some" | "any", a] => {
                WinConditionAst { kind: WinKindAst::Some, a: a.to_string(), b: None, line: *line_no }
            }
            ["no", a] => WinConditionAst { kind: WinKindAst::None, a: a.to_string(), b: None, line: *line_no },
            _ => {
                ctx.error(Section::WinConditions, *line_no, format!("malformed win condition `{trimmed}`"));
                continue;
            }
        };
        ast.win_conditions.push(cond);
    }
}

fn parse_levels(lines: &[(usize, String)], ast: &mut GameAst, ctx: &mut Ctx) {
    let mut grid: Vec<Vec<char>> = Vec::new();
    let mut grid_line = 0usize;
    let flush = |grid: &mut Vec<Vec<char>>, grid_line: usize, ast: &mut GameAst| {
        if !grid.is_empty() {
            ast.levels.push(LevelEntry::Grid { rows: std::mem::take(grid), line: grid_line });
        }
    };
    for (line_no, text) in lines {
        let trimmed_end = text.trim_end();
        if trimmed_end.trim().is_empty() {
            flush(&mut grid, grid_line, ast);
            continue;
        }
        let word1 = trimmed_end.split_whitespace().next().unwrap_or("");
        if word1 == "message" {
            flush(&mut grid, grid_line, ast);
            let tail = trimmed_end.trim_start()["message".len()..].trim().to_string();
            ast.levels.push(LevelEntry::Message { text: tail, line: *line_no });
            continue;
        }
        if grid.is_empty() {
            grid_line = *line_no;
        }
        let row: Vec<char> = trimmed_end.trim_start().chars().collect();
        if row.iter().any(|c| c.is_whitespace()) {
            ctx.error(Section::Levels, *line_no, "level row contains embedded whitespace");
            continue;
        }
        grid.push(row);
    }
    flush(&mut grid, grid_line, ast);
}

/// Right-pad ragged level rows with the background glyph.
fn pad_levels(ast: &mut GameAst, ctx: &mut Ctx) {
    let bg_glyph = background_glyph(ast);
    for entry in &mut ast.levels {
        let LevelEntry::Grid { rows, line } = entry else { continue };
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        if rows.iter().all(|r| r.len() == width) {
            continue;
        }
        match bg_glyph {
            Some(g) => {
                for row in rows.iter_mut() {
                    row.resize(width, g);
                }
            }
            None => {
                ctx.error(Section::Levels, *line, "ragged level rows and no glyph bound to the background object");
            }
        }
    }
}

/// A glyph directly bound to the `background` object, either declared on
/// the object itself or via a single-target legend line.
fn background_glyph(ast: &GameAst) -> Option<char> {
    for decl in &ast.legend {
        if decl.parts.len() == 1 && decl.parts[0] == "background" && decl.name.chars().count() == 1 {
            return decl.name.chars().next();
        }
    }
    ast.objects.iter().find(|o| o.name == "background").and_then(|o| o.glyph)
}

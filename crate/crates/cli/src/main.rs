//! `pz` — compile, solve, replay, play, profile, and render
//! PuzzleScript games from the command line.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage error.

mod play;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use pz_core::compile::playable_level_indices;
use pz_core::engine::EngineLimits;
use pz_core::harness;
use pz_core::render::render_frame;
use pz_core::solver::{self, SearchLimits, SolutionFile};
use pz_core::{compile_source, Compiled};

#[derive(Parser)]
#[command(name = "pz", version, about = "PuzzleScript compiler, engine, solver, and benchmark harness")]
struct Cli {
    /// Keep stdout machine-readable; send human text to stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and compile a game, printing diagnostics.
    Validate {
        file: PathBuf,
        /// Emit diagnostics as a JSON array on stdout.
        #[arg(long)]
        json: bool,
        /// Also dump the compiled game as versioned JSON to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Breadth-first search for level solutions.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        levels: LevelSelect,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        /// Wall-clock budget per level, seconds.
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Disable state deduplication.
        #[arg(long)]
        no_dedupe: bool,
        /// Output file (single level) or directory (--all).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a recorded solution and verify its outcome.
    Replay {
        file: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        solution: PathBuf,
        /// Expected terminal digest (16 hex digits).
        #[arg(long)]
        expect_digest: Option<String>,
        /// Print the rule-application trace as JSON lines.
        #[arg(long)]
        trace: bool,
    },
    /// Play a level in the terminal (debugging aid).
    Play {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random-rollout throughput profiling.
    Profile {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 64)]
        envs: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sweep batch sizes {1, 8, 64, 512} instead of a single run.
        #[arg(long)]
        sweep: bool,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a solution's frames to PNG files.
    Render {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = 4)]
        scale: usize,
        /// Output directory for {game}_{level}_{step}.png files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve-and-replay validation ledger over a directory of games.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        #[arg(long, default_value_t = 60.0)]
        timeout: f64,
        #[arg(long, value_parser = ["json", "csv"], default_value = "json")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct LevelSelect {
    #[arg(long)]
    level: Option<usize>,
    /// Solve every playable level.
    #[arg(long)]
    all: bool,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn out_dir_default() -> PathBuf {
    std::env::var_os("PZ_OUT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn load_game(path: &Path) -> Result<(String, Compiled)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let compiled = compile_source(&text).map_err(|d| anyhow!("compile failed:\n{d}"))?;
    Ok((text, compiled))
}

fn run(cli: Cli) -> Result<()> {
    let quiet = cli.quiet;
    match cli.command {
        Command::Validate { file, json, dump } => cmd_validate(&file, json, dump, quiet),
        Command::Solve { file, levels, max_steps, timeout, seed, no_dedupe, out } => {
            let limits = SearchLimits {
                max_env_steps: max_steps,
                timeout: Duration::from_secs_f64(timeout),
                dedupe: !no_dedupe,
            };
            cmd_solve(&file, &levels, &limits, seed, out, quiet)
        }
        Command::Replay { file, level, solution, expect_digest, trace } => {
            cmd_replay(&file, level, &solution, expect_digest, trace)
        }
        Command::Play { file, level, seed } => play::cmd_play(&file, level, seed),
        Command::Profile { file, level, envs, steps, seed, sweep, format, out } => {
            cmd_profile(&file, level, envs, steps, seed, sweep, &format, out)
        }
        Command::Render { file, level, solution, scale, out } => cmd_render(&file, level, &solution, scale, out),
        Command::Corpus { dir, max_steps, timeout, format, out } => {
            let limits = SearchLimits {
                max_env_steps: max_steps,
                timeout: Duration::from_secs_f64(timeout),
                dedupe: true,
            };
            cmd_corpus(&dir, &limits, &format, out)
        }
    }
}

fn cmd_validate(file: &Path, json: bool, dump: Option<PathBuf>, quiet: bool) -> Result<()> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    match compile_source(&text) {
        Ok(compiled) => {
            let game = &compiled.game;
            let variant_count: usize = game
                .blocks
                .iter()
                .flat_map(|b| b.groups())
                .chain(&game.late_groups)
                .map(|g| g.rules.len())
                .sum();
            let rule_lines: usize = count_rule_lines(&text);
            let summary = format!(
                "{} objects, {} rules -> {} compiled variants; {} levels, {} win conditions",
                game.objects.len(),
                rule_lines,
                variant_count,
                playable_level_indices(game).len(),
                game.win_conditions.len()
            );
            if json {
                println!("{}", pz_core::Diagnostics(compiled.warnings.clone()).to_json());
                eprintln!("{summary}");
            } else {
                for w in &compiled.warnings {
                    eprintln!("{w}");
                }
                if quiet {
                    eprintln!("{summary}");
                } else {
                    println!("{summary}");
                }
            }
            if let Some(dump) = dump {
                std::fs::write(&dump, serde_json::to_string_pretty(&game.to_json())?)?;
                if !quiet {
                    eprintln!("wrote {}", dump.display());
                }
            }
            Ok(())
        }
        Err(diags) => {
            if json {
                println!("{}", diags.to_json());
            }
            bail!("{diags}")
        }
    }
}

/// Count source rule lines (after `+` joining, before direction
/// expansion), for the validate summary.
fn count_rule_lines(text: &str) -> usize {
    let src = pz_core::SourceText::new(text);
    let Ok(pre) = pz_core::preprocess(&src) else { return 0 };
    let Ok(parsed) = pz_core::parse(&pre) else { return 0 };
    parsed
        .ast
        .rule_lines
        .iter()
        .filter(|l| matches!(l, pz_core::ast::RuleLine::Rule(_)))
        .count()
}

fn cmd_solve(
    file: &Path,
    levels: &LevelSelect,
    limits: &SearchLimits,
    seed: Option<u64>,
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<()> {
    let (text, compiled) = load_game(file)?;
    let game = &compiled.game;
    let engine_limits = EngineLimits { rng_seed: seed, ..EngineLimits::default() };
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "game".into());

    let targets: Vec<usize> = match levels.level {
        Some(l) => vec![l],
        None => playable_level_indices(game),
    };
    if targets.is_empty() {
        bail!("no playable levels");
    }

    let results: Vec<(usize, Result<SolutionFile, String>)> = targets
        .par_iter()
        .map(|&level| {
            let r = solver::solve_bfs(game, level, limits, &engine_limits, None)
                .map(|s| s.to_file(&text, level))
                .map_err(|e| e.to_string());
            (level, r)
        })
        .collect();

    let mut any_unsolved = false;
    for (level, result) in results {
        match result {
            Ok(sol) => {
                let path = match (&out, levels.all) {
                    (Some(p), false) => p.clone(),
                    (Some(dir), true) => dir.join(format!("{stem}_L{level}.json")),
                    (None, _) => out_dir_default().join(format!("{stem}_L{level}.json")),
                };
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent).ok();
                }
                std::fs::write(&path, serde_json::to_string_pretty(&sol)?)?;
                let line = format!(
                    "level {level}: solved={} len={} env_steps={} nodes={} best_score={} -> {}",
                    sol.solved,
                    sol.actions.len(),
                    sol.env_steps,
                    sol.nodes_expanded,
                    sol.best_score,
                    path.display()
                );
                if quiet {
                    eprintln!("{line}");
                } else {
                    println!("{line}");
                }
                any_unsolved |= !sol.solved;
            }
            Err(e) => {
                eprintln!("level {level}: error: {e}");
                any_unsolved = true;
            }
        }
    }
    if any_unsolved {
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_replay(
    file: &Path,
    level: usize,
    solution: &Path,
    expect_digest: Option<String>,
    trace: bool,
) -> Result<()> {
    let (_, compiled) = load_game(file)?;
    let game = &compiled.game;
    let sol = harness::read_solution_file(solution).map_err(|e| anyhow!("reading solution: {e}"))?;
    let expected = match expect_digest {
        Some(h) => Some(u64::from_str_radix(h.trim_start_matches("0x"), 16).context("parsing --expect-digest")?),
        None => u64::from_str_radix(&sol.terminal_digest, 16).ok(),
    };
    let engine_limits = EngineLimits {
        rng_seed: game.has_random.then_some(0),
        collect_rule_trace: trace,
        ..EngineLimits::default()
    };
    if trace {
        // Emit one JSON line per rule application while replaying.
        let (mut state, _) = pz_core::engine::init_level(game, level, &engine_limits)
            .map_err(|e| anyhow!("init failed: {e}"))?;
        for &code in &sol.actions {
            let action = pz_core::Action::from_code(code).map_err(|e| anyhow!("{e}"))?;
            let (next, outcome) = pz_core::engine::tick(game, &state, action, &engine_limits)
                .map_err(|e| anyhow!("tick failed: {e}"))?;
            for entry in outcome.rule_trace.iter().flatten() {
                eprintln!("{}", serde_json::to_string(entry)?);
            }
            state = next;
            if outcome.won {
                break;
            }
        }
    }
    let report = solver::replay(game, level, &sol.actions, expected, &engine_limits)
        .map_err(|e| anyhow!("replay failed: {e}"))?;
    println!("{}", serde_json::to_string_pretty(&report.to_json())?);
    if report.status != solver::ReplayStatus::Success {
        std::process::exit(1);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_profile(
    file: &Path,
    level: usize,
    envs: usize,
    steps: usize,
    seed: u64,
    sweep: bool,
    format: &str,
    out: Option<PathBuf>,
) -> Result<()> {
    let (_, compiled) = load_game(file)?;
    let game = &compiled.game;
    let report = if sweep {
        harness::profile_sweep(game, level, steps, seed)
    } else {
        harness::profile_random(game, level, envs, steps, seed)
    }
    .map_err(|e| anyhow!("profiling failed: {e}"))?;

    let rendered = match format {
        "csv" => {
            let mut s = String::from("num_envs,steps_per_env,total_ticks,elapsed_s,fps\n");
            match &report.sweep {
                Some(points) => {
                    for p in points {
                        s.push_str(&format!(
                            "{},{},{},{:.6},{:.1}\n",
                            p.num_envs, report.steps_per_env, p.total_ticks, p.elapsed_s, p.fps
                        ));
                    }
                }
                None => s.push_str(&format!(
                    "{},{},{},{:.6},{:.1}\n",
                    report.num_envs, report.steps_per_env, report.total_ticks, report.elapsed_s, report.fps
                )),
            }
            s
        }
        _ => serde_json::to_string_pretty(&report)?,
    };
    match out {
        Some(path) => std::fs::write(&path, rendered)?,
        None => println!("{rendered}"),
    }
    Ok(())
}

fn cmd_render(file: &Path, level: usize, solution: &Path, scale: usize, out: Option<PathBuf>) -> Result<()> {
    let (_, compiled) = load_game(file)?;
    let game = &compiled.game;
    let sol = harness::read_solution_file(solution).map_err(|e| anyhow!("reading solution: {e}"))?;
    let dir = out.unwrap_or_else(out_dir_default);
    std::fs::create_dir_all(&dir)?;
    let stem = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "game".into());

    let engine_limits = EngineLimits { rng_seed: game.has_random.then_some(0), ..EngineLimits::default() };
    let (mut state, _) = pz_core::engine::init_level(game, level, &engine_limits)
        .map_err(|e| anyhow!("init failed: {e}"))?;

    let write_frame = |state: &pz_core::GridState, step: usize| -> Result<()> {
        let frame = render_frame(game, state, scale);
        let path = dir.join(format!("{stem}_{level}_{step}.png"));
        image::save_buffer(
            &path,
            &frame.pixels,
            frame.width as u32,
            frame.height as u32,
            image::ColorType::Rgb8,
        )
        .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    };
    write_frame(&state, 0)?;
    for (i, &code) in sol.actions.iter().enumerate() {
        let action = pz_core::Action::from_code(code).map_err(|e| anyhow!("{e}"))?;
        let (next, outcome) = pz_core::engine::tick(game, &state, action, &engine_limits)
            .map_err(|e| anyhow!("tick failed: {e}"))?;
        state = next;
        write_frame(&state, i + 1)?;
        if outcome.won {
            break;
        }
    }
    eprintln!("wrote frames to {}", dir.display());
    Ok(())
}

fn cmd_corpus(dir: &Path, limits: &SearchLimits, format: &str, out: Option<PathBuf>) -> Result<()> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .collect();
    paths.sort();
    let ledger = harness::validate_corpus(&paths, limits);

    let rendered = match format {
        "csv" => ledger.to_csv(),
        _ => serde_json::to_string_pretty(&ledger.to_json())?,
    };
    match out {
        Some(path) => {
            std::fs::write(&path, rendered)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{rendered}")?;
        }
    }
    let c = &ledger.counts;
    eprintln!(
        "total={} success={} compile_error={} runtime_error={} solution_error={} state_error={} unvalidated={}",
        c.total(),
        c.success,
        c.compile_error,
        c.runtime_error,
        c.solution_error,
        c.state_error,
        c.unvalidated
    );
    Ok(())
}

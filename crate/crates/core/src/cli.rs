//! Command implementations behind the `stopgame` binary.
//!
//! Exit codes: 0 when the gap certificate passes, 1 when a gap exceeds its
//! bound, 2 on invalid input.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::equilibrium::{assemble, Mode, SolveOptions};
use crate::error::{Error, Result};
use crate::generate::{describe, generate, GenerateParams};
use crate::io::{self, ResultDoc, VerificationDoc, SCHEMA};
use crate::payoff::StoppingGame;
use crate::verify::nash_gap;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_GAP: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "stopgame",
    version,
    about = "Epsilon-Nash equilibria of stopping games on scenario trees"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Build an equilibrium for an instance and certify it.
    Solve(SolveArgs),
    /// Measure the Nash gaps of a strategy pair.
    Verify(VerifyArgs),
    /// Print the summary of a result file.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of grid steps `N`.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    #[arg(long, default_value_t = 0.5)]
    pub h: f64,
    #[arg(long, default_value_t = 2)]
    pub branching: usize,
    /// Target Lipschitz constant `L` of the payoff in (j, k).
    #[arg(long, default_value_t = 1.0)]
    pub lipschitz: f64,
    /// Payoffs are kept in `[-M, M]`.
    #[arg(long, default_value_t = 10.0)]
    pub scale: f64,
    #[arg(long)]
    pub zero_sum: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Delay after the hitting times; a positive multiple of `h`.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value = "nonzero-sum")]
    pub mode: String,
    /// Result file; the summary goes to stdout either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    /// A `strategies` or `result` document.
    pub strategies: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub result: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced: the exit code, the machine-readable document
/// and the human summary.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit: i32,
    pub document: Option<String>,
    pub summary: String,
}

pub fn command_generate(params: &GenerateParams) -> Result<String> {
    let game = generate(params)?;
    Ok(io::instance_to_string(&game, Some(&describe(params))))
}

fn delta_steps(game: &StoppingGame, delta: Option<f64>) -> Result<usize> {
    let Some(d) = delta else { return Ok(1) };
    let h = game.tree.grid().h();
    let ratio = d / h;
    let steps = ratio.round();
    if d.is_nan() || d <= 0.0 || (ratio - steps).abs() > 1e-9 || steps < 1.0 {
        return Err(Error::Parse {
            locus: "--delta".into(),
            reason: format!("{d} is not a positive multiple of h = {h}"),
        });
    }
    Ok(steps as usize)
}

/// Runs the pipeline on a loaded game. The exit code is 1 when a measured
/// gap exceeds the mode's bound.
pub fn solve_game(
    game: &StoppingGame,
    epsilon: f64,
    delta: Option<f64>,
    mode: Mode,
) -> Result<Outcome> {
    let opts = SolveOptions::new(epsilon).with_delta_steps(delta_steps(game, delta)?);
    let bundle = assemble(game, mode, opts)?;
    let doc = io::result_to_doc(&bundle);
    Ok(Outcome {
        exit: if doc.certified { EXIT_PASS } else { EXIT_GAP },
        summary: summarize(&doc),
        document: Some(io::to_canonical_string(&doc)),
    })
}

pub fn command_solve(
    instance: &Path,
    epsilon: f64,
    delta: Option<f64>,
    mode: Mode,
) -> Result<Outcome> {
    let inst = io::load_instance(instance)?;
    solve_game(&inst.game, epsilon, delta, mode)
}

fn verification(
    epsilon: f64,
    passed: bool,
    gaps: Option<io::GapDoc>,
    violations: Vec<String>,
) -> String {
    io::to_canonical_string(&VerificationDoc {
        schema: SCHEMA.into(),
        kind: "verification".into(),
        epsilon,
        passed,
        gaps,
        violations,
    })
}

/// Never fails: invalid input becomes exit 2 with the problems listed in
/// the report.
pub fn command_verify(instance: &Path, strategies: &Path, epsilon: f64) -> Outcome {
    let invalid = |reasons: Vec<String>| Outcome {
        exit: EXIT_INVALID,
        summary: format!(
            "invalid input:\n{}",
            reasons
                .iter()
                .map(|r| format!("  {r}\n"))
                .collect::<String>()
        ),
        document: Some(verification(epsilon, false, None, reasons)),
    };
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return invalid(vec![format!("epsilon must be non-negative, got {epsilon}")]);
    }
    let inst = match io::load_instance(instance) {
        Ok(i) => i,
        Err(e) => return invalid(vec![format!("instance: {e}")]),
    };
    let game = &inst.game;
    let (rho, tau) = match io::load_strategies(&game.tree, strategies) {
        Ok(p) => p,
        Err(Error::InvalidStrategy(v)) => {
            return invalid(v.iter().map(|x| x.to_string()).collect())
        }
        Err(e) => return invalid(vec![format!("strategies: {e}")]),
    };
    let report = nash_gap(game, &rho, &tau);
    let passed = report.certifies(epsilon);
    let summary = format!(
        "gaps: player 1 {:.6}, player 2 {:.6} against epsilon {epsilon}: {}\n",
        report.gaps[0],
        report.gaps[1],
        if passed { "pass" } else { "gap exceeded" }
    );
    Outcome {
        exit: if passed { EXIT_PASS } else { EXIT_GAP },
        summary,
        document: Some(verification(
            epsilon,
            passed,
            Some(io::gap_to_doc(&report)),
            Vec::new(),
        )),
    }
}

pub fn command_report(result: &Path) -> Result<Outcome> {
    let doc = io::parse_result(&fs::read_to_string(result)?)?;
    Ok(Outcome {
        exit: if doc.certified { EXIT_PASS } else { EXIT_GAP },
        summary: summarize(&doc),
        document: None,
    })
}

fn mark(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "FAIL"
    }
}

/// Human summary of a result document.
pub fn summarize(doc: &ResultDoc) -> String {
    let mut s = String::new();
    let d = &doc.diagnostics;
    let _ = writeln!(s, "mode: {}", doc.mode);
    let _ = writeln!(
        s,
        "epsilon: {}  h: {}  delta: {} ({} step{})",
        doc.epsilon,
        doc.h,
        doc.delta,
        doc.delta_steps,
        if doc.delta_steps == 1 { "" } else { "s" }
    );
    let _ = writeln!(
        s,
        "r(h) = {:.6}, r(h) < epsilon/3: {}",
        d.step_modulus,
        if d.step_condition { "yes" } else { "no" }
    );
    for (i, v) in d.dynkin_values.iter().enumerate() {
        let _ = writeln!(s, "Dynkin value {}: {:.6}", i + 1, v);
    }
    let _ = writeln!(
        s,
        "payoffs: player 1 {:.6}, player 2 {:.6}",
        doc.gaps.values[0], doc.gaps.values[1]
    );
    let _ = writeln!(
        s,
        "gaps: player 1 {:.6}, player 2 {:.6}, bound {} -> {}",
        doc.gaps.gaps[0],
        doc.gaps.gaps[1],
        doc.bound,
        if doc.certified {
            "certified"
        } else {
            "gap exceeded"
        }
    );
    for l in &d.lemma2 {
        let _ = writeln!(
            s,
            "[{}] next-anchor families, player {}: slack X {:.6}, slack Y {:.6}",
            mark(l.passed),
            l.player,
            l.slack_x,
            l.slack_y
        );
    }
    if let Some(sub) = d.submartingale {
        let _ = writeln!(
            s,
            "[{}] submartingale before mu: worst {:.3e}, {:.3e}",
            mark(sub.iter().all(|&x| x >= -1e-9)),
            sub[0],
            sub[1]
        );
    }
    for c in &d.delta_conditions {
        let who = c
            .player
            .map(|p| format!(" (player {p})"))
            .unwrap_or_default();
        let threshold = c
            .threshold
            .map(|t| format!("{t:.6}"))
            .unwrap_or_else(|| "inf".into());
        let _ = writeln!(
            s,
            "[{}] {}{}: measured {:.6}, threshold {}",
            mark(c.passed),
            c.name,
            who,
            c.measured,
            threshold
        );
    }
    s
}

fn emit(out: Option<&Path>, document: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, document)?,
        None => print!("{document}"),
    }
    Ok(())
}

fn report_error(e: &Error) -> i32 {
    eprintln!("error: {e}");
    EXIT_INVALID
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Generate(a) => {
            let params = GenerateParams {
                seed: a.seed,
                levels: a.levels,
                h: a.h,
                branching: a.branching,
                lipschitz: a.lipschitz,
                scale: a.scale,
                zero_sum: a.zero_sum,
            };
            match command_generate(&params).and_then(|doc| emit(a.out.as_deref(), &doc)) {
                Ok(()) => EXIT_PASS,
                Err(e) => report_error(&e),
            }
        }
        Command::Solve(a) => {
            let outcome = io::parse_mode(&a.mode)
                .and_then(|m| command_solve(&a.instance, a.epsilon, a.delta, m));
            match outcome {
                Ok(o) => {
                    let doc = o.document.as_deref().unwrap_or_default();
                    if let Err(e) = emit(a.out.as_deref(), doc) {
                        return report_error(&e);
                    }
                    if a.out.is_some() {
                        print!("{}", o.summary);
                    } else {
                        eprint!("{}", o.summary);
                    }
                    o.exit
                }
                Err(e) => report_error(&e),
            }
        }
        Command::Verify(a) => {
            let o = command_verify(&a.instance, &a.strategies, a.epsilon);
            if let Err(e) = emit(a.out.as_deref(), o.document.as_deref().unwrap_or_default()) {
                return report_error(&e);
            }
            eprint!("{}", o.summary);
            o.exit
        }
        Command::Report(a) => match command_report(&a.result) {
            Ok(o) => {
                if let Err(e) = emit(a.out.as_deref(), &o.summary) {
                    return report_error(&e);
                }
                o.exit
            }
            Err(e) => report_error(&e),
        },
    }
}

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::problem::{load_problem, parse_problem_file};
use crate::error::{Error, Result};
use crate::extract::{solve_program, ReportStatus, SolveOptionsExt, SolveReport};
use crate::model::{check_assumption2, check_slater, validate, CheckReport};
use crate::relax::RelaxOptions;
use crate::sdpsolve::SolveOptions;
use crate::verify::{grid_oracle, GridSpec, OracleResult, DEFAULT_STEPS};

pub const SCHEMA: &str = "fracsos/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_UNCERTIFIED: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "fracsos", version, about = "Solve fractional programs with SOS-convex semi-algebraic data by one SDP")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the moment relaxation, extract and certify the minimizer.
    Solve(SolveArgs),
    /// Validate the problem and check the interior-point assumptions.
    Check(CheckArgs),
    /// Brute-force grid search over a box (n <= 3).
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Emit a JSON document.
    #[arg(long, conflicts_with = "text")]
    pub json: bool,
    /// Emit a human-readable report (default).
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub path: PathBuf,
    /// Gap and feasibility tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Restrict the moment basis to the Newton polytope of the data.
    #[arg(long)]
    pub basis_reduction: bool,
    /// Skip the Dinkelbach cross-check.
    #[arg(long)]
    pub no_dinkelbach: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub path: PathBuf,
    /// Candidate Slater point, e.g. "0,0".
    #[arg(long, allow_hyphen_values = true)]
    pub slater_point: Option<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub path: PathBuf,
    /// Box "lo1:hi1,lo2:hi2,...".
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: String,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    /// JSON report of an earlier `solve --json` to compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'a str,
    exit_code: i32,
    #[serde(flatten)]
    body: T,
}

fn emit_json<T: Serialize>(out: &mut dyn Write, command: &str, exit_code: i32, body: T) -> std::io::Result<()> {
    let doc = Envelope { schema: SCHEMA, command, exit_code, body };
    let text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    writeln!(out, "{text}")
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn solve_exit_code(status: ReportStatus) -> i32 {
    match status {
        ReportStatus::Certified => EXIT_OK,
        ReportStatus::Uncertified | ReportStatus::Degenerate => EXIT_UNCERTIFIED,
        ReportStatus::Infeasible | ReportStatus::Unbounded => EXIT_INFEASIBLE,
        ReportStatus::SolverFailure => EXIT_SOLVER,
    }
}

fn render_solve(r: &SolveReport) -> String {
    let mut s = String::new();
    let status = serde_json::to_value(r.status).expect("status");
    let _ = writeln!(s, "status          {}", status.as_str().unwrap_or("?"));
    match r.optimal_value {
        Some(v) => {
            let _ = writeln!(s, "optimal value   {v:.8}");
        }
        None => {
            let _ = writeln!(s, "optimal value   -");
        }
    }
    if let Some(x) = &r.x_bar {
        let _ = writeln!(s, "x_bar           {}", fmt_vec(x));
    }
    if r.degenerate {
        let _ = writeln!(s, "degenerate moment vector (|y0| <= tol), no point extracted");
    }
    let _ = writeln!(
        s,
        "basis           {} monomials, {} moments{}",
        r.basis_size,
        r.support_size,
        if r.basis_reduction { " (Newton reduction)" } else { "" }
    );
    if let Some(c) = &r.certification {
        for k in &c.constraints {
            let _ = writeln!(s, "  {:<12} {:+.3e} {}", k.label, k.value, if k.ok { "ok" } else { "VIOLATED" });
        }
        let _ = writeln!(s, "  denominator  {:+.6e}", c.denominator);
        if let Some(rt) = c.ratio_at_xbar {
            let _ = writeln!(s, "  ratio(x_bar) {rt:.8}  gap {:.3e}", c.ratio_gap.unwrap_or(f64::NAN));
        }
        if let Some(dk) = c.dinkelbach_residual {
            let _ = writeln!(s, "  dinkelbach   {dk:+.3e}");
        }
        for f in &c.failures {
            let _ = writeln!(s, "  failure: {f}");
        }
    }
    for sub in &r.sub_solves {
        let st = serde_json::to_value(sub.status).expect("status");
        let _ = writeln!(s, "sub-solve       {}: {} in {} iterations", sub.name, st.as_str().unwrap_or("?"), sub.iterations);
    }
    s
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let prog = load_problem(&a.path)?;
    let opts = SolveOptionsExt {
        solver: SolveOptions { tol_gap: a.tol, tol_feas: a.tol, max_iter: a.max_iter, ..Default::default() },
        relax: RelaxOptions { basis_reduction: a.basis_reduction },
        dinkelbach: !a.no_dinkelbach,
        ..Default::default()
    };
    let report = solve_program(&prog, &opts)?;
    let code = solve_exit_code(report.status);
    if a.output.json {
        emit_json(out, "solve", code, SolveBody { report: &report })?;
    } else {
        write!(out, "{}", render_solve(&report))?;
    }
    Ok(code)
}

#[derive(Serialize)]
struct SolveBody<'a> {
    report: &'a SolveReport,
}

#[derive(Serialize)]
struct CheckBody<'a> {
    passed: bool,
    checks: &'a CheckReport,
}

fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Validation(format!("bad coordinate {p:?}: {e}"))))
        .collect()
}

fn cmd_check(a: &CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let prog = parse_problem_file(&std::fs::read_to_string(&a.path)?)?.to_program_unvalidated()?;
    let xhat = a.slater_point.as_deref().map(parse_point).transpose()?;
    let mut report = validate(&prog);
    report.extend(check_assumption2(&prog));
    if let Some(x) = &xhat {
        report.extend(check_slater(&prog, x)?);
    }
    let passed = report.passed();
    let code = if passed { EXIT_OK } else { EXIT_UNCERTIFIED };
    if a.output.json {
        emit_json(out, "check", code, CheckBody { passed, checks: &report })?;
    } else {
        write!(out, "{report}")?;
        writeln!(out, "{}", if passed { "all checks passed" } else { "some checks FAILED" })?;
    }
    Ok(code)
}

#[derive(Serialize)]
struct OracleBody<'a> {
    oracle: &'a OracleResult,
    steps: usize,
    compare: Option<Comparison>,
}

#[derive(Serialize)]
struct Comparison {
    sdp_value: f64,
    gap: f64,
}

fn load_compare(path: &Path) -> Result<f64> {
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)
        .map_err(|e| Error::Parse(format!("{e} (line {}, column {})", e.line(), e.column())))?;
    doc.pointer("/report/optimal_value")
        .or_else(|| doc.pointer("/optimal_value"))
        .and_then(serde_json::Value::as_f64)
        .ok_or_else(|| Error::Parse(format!("{} has no optimal_value", path.display())))
}

fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let spec = GridSpec::parse_box(&a.bounds, a.steps)?;
    let prog = load_problem(&a.path)?;
    let compare = a.compare.as_deref().map(load_compare).transpose()?;
    let res = grid_oracle(&prog, &spec)?;
    let compare = compare.map(|v| Comparison { sdp_value: v, gap: res.value - v });
    if a.output.json {
        emit_json(out, "oracle", EXIT_OK, OracleBody { oracle: &res, steps: a.steps, compare })?;
    } else {
        writeln!(out, "oracle value    {:.8}", res.value)?;
        writeln!(out, "argmin          {}", fmt_vec(&res.argmin))?;
        writeln!(out, "feasible points {} of {}", res.feasible_points, res.grid_points)?;
        if let Some(c) = compare {
            writeln!(out, "sdp value       {:.8}  gap {:+.3e}", c.sdp_value, c.gap)?;
        }
    }
    Ok(EXIT_OK)
}

fn error_exit(e: &Error) -> i32 {
    match e {
        Error::EmptyOmega | Error::OmegaNotCompact => EXIT_INFEASIBLE,
        Error::Solver(_) => EXIT_SOLVER,
        _ if e.to_string().contains("empty grid sample") => EXIT_INFEASIBLE,
        _ => EXIT_INPUT,
    }
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Check(a) => cmd_check(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            error_exit(&e)
        }
    }
}

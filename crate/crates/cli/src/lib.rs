//! Command-line front end: loads a JSON problem, runs one of the solvers and
//! writes CSV/JSON artifacts for inspection or plotting.
//!
//! Exit codes are part of the interface, see [`exit`].

mod args;
mod output;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

use picard_bvp::analysis::{gate_for, improvement_threshold, max_lipschitz, min_subintervals};
use picard_bvp::multishoot::solve_multi;
use picard_bvp::oracle::{default_step, shooting_solve};
use picard_bvp::picard::{solve, SolveOptions};
use picard_bvp::polynomial::sample_grid;
use picard_bvp::problem::file::ProblemFile;
use picard_bvp::problem::{SystemSpec, Unknown, LIPSCHITZ_GRID, Y};
use picard_bvp::Error;

pub use args::{Cli, Command, CommonArgs, Format};
use output::{write_json, Csv};

/// Settings shared by every subcommand.
pub type RunConfig = CommonArgs;

pub mod exit {
    pub const CONVERGED: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const MAX_ITERATIONS: u8 = 2;
    pub const DIVERGED: u8 = 3;
    pub const BRACKETING: u8 = 4;
    /// compare-oracle: the difference exceeded `--tol`.
    pub const TOLERANCE: u8 = 5;
}

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_GATE_MAX_N: usize = 8;

/// A failed run: message for stderr and the process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: exit::USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::Divergence { .. } | Error::OracleDivergence { .. } => exit::DIVERGED,
            Error::Bracketing { .. } => exit::BRACKETING,
            _ => exit::USAGE,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Self::usage(format!("cannot write artifacts: {err}"))
    }
}

type RunResult = Result<u8, Failure>;

/// Parses `argv` and runs the selected subcommand; returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::CONVERGED };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(a),
        Command::SolveMulti(a) => run_solve_multi(a),
        Command::Gates(a) => run_gates(a),
        Command::CompareOracle(a) => run_compare_oracle(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn load(cfg: &RunConfig) -> Result<(ProblemFile, SystemSpec<f64>), Failure> {
    let problem = ProblemFile::load(&cfg.problem).map_err(|e| Failure::usage(format!("{}: {e}", cfg.problem.display())))?;
    let spec = problem
        .to_spec()
        .map_err(|e| Failure::usage(format!("{}: {e}", cfg.problem.display())))?;
    for warning in spec.validate() {
        eprintln!("warning: {warning}");
    }
    Ok((problem, spec))
}

fn options(cfg: &RunConfig) -> Result<SolveOptions, Failure> {
    let defaults = SolveOptions::default();
    let opts = SolveOptions {
        max_iterations: cfg.iters.unwrap_or(defaults.max_iterations),
        gamma_tol: cfg.gamma_tol.unwrap_or(defaults.gamma_tol),
        state_tol: cfg.state_tol.unwrap_or(defaults.state_tol),
        degree_cap: cfg.degree_cap.unwrap_or(defaults.degree_cap),
        samples: cfg.samples.unwrap_or(defaults.samples),
        ..defaults
    };
    opts.validate()?;
    Ok(opts)
}

fn wants(cfg: &RunConfig, format: Format) -> bool {
    cfg.format.contains(&format)
}

fn prepare_out(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))
}

fn unknown_name(unknown: Unknown) -> &'static str {
    match unknown {
        Unknown::Slope => "gamma",
        Unknown::LeftValue => "alpha",
    }
}

#[derive(Serialize)]
struct SolveReport {
    converged: bool,
    iterations: usize,
    unknown: &'static str,
    final_unknown: f64,
    unknown_trace: Vec<f64>,
    unknown_deltas: Vec<f64>,
    right_residuals: Vec<f64>,
    sup_deltas: Vec<f64>,
}

pub fn run_solve(cfg: &RunConfig) -> RunResult {
    let (_, spec) = load(cfg)?;
    let opts = options(cfg)?;
    let sol = solve(&spec, &opts)?;
    prepare_out(&cfg.out)?;

    if wants(cfg, Format::Csv) {
        let mut trace = Csv::new(&["k", "value", "delta"]);
        for it in &sol.history {
            trace.row(&[&it.k, &it.unknown_value, &it.unknown_delta]);
        }
        trace.write(&cfg.out.join("gamma_trace.csv"))?;

        let mut curve = Csv::new(&["t", "y", "u"]);
        for t in sample_grid(spec.a, spec.b, opts.samples) {
            curve.row(&[&t, &sol.final_states[0].evaluate(t), &sol.final_states[1].evaluate(t)]);
        }
        curve.write(&cfg.out.join("solution.csv"))?;
    }
    if wants(cfg, Format::Json) {
        let report = SolveReport {
            converged: sol.converged,
            iterations: sol.iterations_used,
            unknown: unknown_name(sol.unknown),
            final_unknown: sol.final_unknown(),
            unknown_trace: sol.unknown_trace.clone(),
            unknown_deltas: sol.history.iter().map(|s| s.unknown_delta).collect(),
            right_residuals: sol.residual_trace.clone(),
            sup_deltas: sol.state_delta_trace.clone(),
        };
        write_json(&cfg.out.join("report.json"), &report)?;
    }

    println!(
        "{} after {} iteration(s): {} = {:?}, right residual {:e}",
        if sol.converged { "converged" } else { "stopped" },
        sol.iterations_used,
        unknown_name(sol.unknown),
        sol.final_unknown(),
        sol.residual_trace.last().copied().unwrap_or(f64::NAN),
    );
    Ok(if sol.converged { exit::CONVERGED } else { exit::MAX_ITERATIONS })
}

#[derive(Serialize)]
struct NodeReport {
    node: usize,
    t: f64,
    value_gap: f64,
    slope_gap: f64,
}

#[derive(Serialize)]
struct MultiReport {
    converged: bool,
    iterations: usize,
    segments: usize,
    unknown_trace: Vec<f64>,
    unknown_deltas: Vec<f64>,
    right_residuals: Vec<f64>,
    sup_deltas: Vec<f64>,
    betas: Vec<f64>,
    gammas: Vec<f64>,
    continuity: Vec<NodeReport>,
}

pub fn run_solve_multi(cfg: &RunConfig) -> RunResult {
    let n = match cfg.segments {
        Some(n) if n >= 2 => n,
        Some(_) => return Err(Failure::usage("solve-multi needs --segments >= 2; use `solve` for one interval")),
        None => return Err(Failure::usage("solve-multi needs --segments N (N >= 2)")),
    };
    let (_, spec) = load(cfg)?;
    let opts = options(cfg)?;
    let sol = solve_multi(&spec, n, &opts)?;
    prepare_out(&cfg.out)?;

    if wants(cfg, Format::Csv) {
        let mut curve = Csv::new(&["segment", "t", "y", "u"]);
        for seg in &sol.segments {
            let (t0, t1) = (sol.partition.nodes[seg.j - 1], sol.partition.nodes[seg.j]);
            for t in sample_grid(t0, t1, opts.samples) {
                curve.row(&[&seg.j, &t, &seg.y().evaluate(t), &seg.u().evaluate(t)]);
            }
        }
        curve.write(&cfg.out.join("segments.csv"))?;

        let mut nodes = Csv::new(&["node", "t", "value_gap", "slope_gap"]);
        for c in &sol.continuity_report {
            nodes.row(&[&c.node, &c.t, &c.value_gap, &c.slope_gap]);
        }
        nodes.write(&cfg.out.join("continuity.csv"))?;
    }
    if wants(cfg, Format::Json) {
        let report = MultiReport {
            converged: sol.converged,
            iterations: sol.iterations_used,
            segments: n,
            unknown_trace: sol.trace.iter().map(|r| r.gammas[0]).collect(),
            unknown_deltas: sol.trace.iter().map(|r| r.unknown_delta).collect(),
            right_residuals: sol.trace.iter().map(|r| r.right_residual).collect(),
            sup_deltas: sol.trace.iter().map(|r| r.state_delta).collect(),
            betas: sol.betas.clone(),
            gammas: sol.segments.iter().map(|s| s.gamma).collect(),
            continuity: sol
                .continuity_report
                .iter()
                .map(|c| NodeReport {
                    node: c.node,
                    t: c.t,
                    value_gap: c.value_gap,
                    slope_gap: c.slope_gap,
                })
                .collect(),
        };
        write_json(&cfg.out.join("report.json"), &report)?;
    }

    println!(
        "{} after {} iteration(s) on {n} segments: gamma_1 = {:?}, largest continuity gap {:e}",
        if sol.converged { "converged" } else { "stopped" },
        sol.iterations_used,
        sol.segments[0].gamma,
        sol.max_continuity_gap(),
    );
    Ok(if sol.converged { exit::CONVERGED } else { exit::MAX_ITERATIONS })
}

#[derive(Serialize)]
struct GateRow {
    n: usize,
    regime: &'static str,
    quantity: f64,
    bound: f64,
    passed: bool,
    max_lipschitz: f64,
    improvement_threshold: Option<f64>,
}

#[derive(Serialize)]
struct GatesReport {
    lipschitz: f64,
    lipschitz_source: &'static str,
    width: f64,
    min_subintervals: Option<usize>,
    rows: Vec<GateRow>,
}

pub fn run_gates(cfg: &RunConfig) -> RunResult {
    let (problem, spec) = load(cfg)?;
    let (l, source) = match (cfg.lipschitz, problem.lipschitz_bounds(&spec)) {
        (Some(l), _) if l >= 0.0 && l.is_finite() => (l, "given"),
        (Some(l), _) => return Err(Failure::usage(format!("--lipschitz must be a finite non-negative number, got {l}"))),
        (None, Some(bounds)) => (spec.estimate_lipschitz(&bounds, LIPSCHITZ_GRID).value, "estimated"),
        (None, None) => {
            return Err(Failure::usage(
                "gates needs --lipschitz L or a lipschitz_box in the problem file",
            ))
        }
    };
    let n_max = cfg.segments.unwrap_or(DEFAULT_GATE_MAX_N).max(1);
    let rows: Vec<GateRow> = (1..=n_max)
        .map(|n| {
            let g = gate_for(l, spec.a, spec.b, n);
            GateRow {
                n,
                regime: g.regime.as_str(),
                quantity: g.lhs,
                bound: g.bound,
                passed: g.passed,
                max_lipschitz: max_lipschitz(spec.a, spec.b, n),
                improvement_threshold: (n >= 2).then(|| improvement_threshold(n)),
            }
        })
        .collect();
    let best = min_subintervals(l, spec.a, spec.b, n_max);

    println!("L = {l} ({source}), b - a = {}", spec.width());
    println!("{:>3}  {:<13} {:>12} {:>8}  {:<4}  {:>12}  {:>11}", "n", "regime", "quantity", "bound", "gate", "L_max", "improvement");
    for r in &rows {
        println!(
            "{:>3}  {:<13} {:>12.6} {:>8.4}  {:<4}  {:>12.6}  {:>11}",
            r.n,
            r.regime,
            r.quantity,
            r.bound,
            if r.passed { "pass" } else { "fail" },
            r.max_lipschitz,
            r.improvement_threshold.map_or("-".to_string(), |x| format!("{x:.6}")),
        );
    }
    match best {
        Some(n) => println!("smallest passing n: {n}"),
        None => println!("no n <= {n_max} passes"),
    }

    prepare_out(&cfg.out)?;
    if wants(cfg, Format::Csv) {
        let mut csv = Csv::new(&["n", "regime", "quantity", "bound", "passed", "max_lipschitz", "improvement_threshold"]);
        for r in &rows {
            csv.row(&[&r.n, &r.regime, &r.quantity, &r.bound, &r.passed, &r.max_lipschitz, &r.improvement_threshold]);
        }
        csv.write(&cfg.out.join("gates.csv"))?;
    }
    if wants(cfg, Format::Json) {
        let report = GatesReport {
            lipschitz: l,
            lipschitz_source: source,
            width: spec.width(),
            min_subintervals: best,
            rows,
        };
        write_json(&cfg.out.join("report.json"), &report)?;
    }
    Ok(exit::CONVERGED)
}

#[derive(Serialize)]
struct CompareReport {
    picard_converged: bool,
    picard_iterations: usize,
    picard_unknown: f64,
    oracle_unknown: f64,
    oracle_step: f64,
    max_diff: f64,
    tol: f64,
    passed: bool,
}

pub fn run_compare_oracle(cfg: &RunConfig) -> RunResult {
    let (_, spec) = load(cfg)?;
    let opts = options(cfg)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let sol = solve(&spec, &opts)?;
    let guess = sol.final_unknown();
    let (lo, hi) = match cfg.bracket.as_deref() {
        Some(&[lo, hi]) => (lo, hi),
        Some(_) => return Err(Failure::usage("--bracket takes exactly two numbers: LO,HI")),
        None => {
            let d = 0.1 * guess.abs().max(1.0);
            (guess - d, guess + d)
        }
    };
    let step = default_step(&spec);
    let (oracle_unknown, traj) = shooting_solve(&spec, lo, hi, 1e-12, step).map_err(|e| {
        let mut f = Failure::from(e);
        if f.code == exit::BRACKETING {
            f.message.push_str("; pass a wider --bracket LO,HI");
        }
        f
    })?;
    let y = &sol.final_states[Y];
    let max_diff = traj
        .times
        .iter()
        .zip(&traj.values)
        .map(|(&t, x)| (y.evaluate(t) - x[Y]).abs())
        .fold(0.0, f64::max);
    let passed = max_diff < tol;

    prepare_out(&cfg.out)?;
    if wants(cfg, Format::Csv) {
        let mut csv = Csv::new(&["t", "y_picard", "y_oracle", "abs_diff"]);
        for t in sample_grid(spec.a, spec.b, opts.samples) {
            let yp = y.evaluate(t);
            let yo = traj.y_at(t).unwrap_or(f64::NAN);
            csv.row(&[&t, &yp, &yo, &(yp - yo).abs()]);
        }
        csv.write(&cfg.out.join("oracle_compare.csv"))?;
    }
    if wants(cfg, Format::Json) {
        let report = CompareReport {
            picard_converged: sol.converged,
            picard_iterations: sol.iterations_used,
            picard_unknown: guess,
            oracle_unknown,
            oracle_step: step,
            max_diff,
            tol,
            passed,
        };
        write_json(&cfg.out.join("report.json"), &report)?;
    }
    println!(
        "max |y_picard - y_oracle| = {max_diff:e} (tolerance {tol:e}); {} picard = {guess:?}, oracle = {oracle_unknown:?}",
        unknown_name(spec.unknown)
    );
    Ok(if passed { exit::CONVERGED } else { exit::TOLERANCE })
}

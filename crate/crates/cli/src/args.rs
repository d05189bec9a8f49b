use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "picard-bvp", version, about = "Symbolic Picard iteration for two-point boundary value problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-interval iteration on the whole of [a, b].
    Solve(CommonArgs),
    /// Multi-interval iteration on an equal partition (needs --segments >= 2).
    SolveMulti(CommonArgs),
    /// Print the sufficient-condition gates for n = 1..=N subintervals.
    Gates(CommonArgs),
    /// Compare the Picard solution against RK4 shooting.
    CompareOracle(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON problem file.
    #[arg(long)]
    pub problem: PathBuf,

    /// Maximum number of iterations.
    #[arg(long)]
    pub iters: Option<usize>,

    /// Stopping tolerance on the change of the unknown initial value.
    #[arg(long = "gamma-tol")]
    pub gamma_tol: Option<f64>,

    /// Stopping tolerance on the sampled change of the states.
    #[arg(long = "state-tol")]
    pub state_tol: Option<f64>,

    /// Degree at which products are truncated.
    #[arg(long = "degree-cap")]
    pub degree_cap: Option<usize>,

    /// Grid points for sampled norms and solution output.
    #[arg(long)]
    pub samples: Option<usize>,

    /// Subintervals for solve-multi; largest n tabulated by gates.
    #[arg(long)]
    pub segments: Option<usize>,

    /// Lipschitz constant of f in (y, y') for gates.
    #[arg(long)]
    pub lipschitz: Option<f64>,

    /// Acceptance threshold for compare-oracle.
    #[arg(long)]
    pub tol: Option<f64>,

    /// Shooting bracket for compare-oracle, as LO,HI.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bracket: Option<Vec<f64>>,

    /// Output directory for artifacts.
    #[arg(long, default_value = "picard-out")]
    pub out: PathBuf,

    /// Artifact formats to write.
    #[arg(long, value_delimiter = ',', default_value = "csv,json")]
    pub format: Vec<Format>,
}

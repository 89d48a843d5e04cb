//! `fqpe` command line: each subcommand wraps one library operation and writes
//! JSON/CSV (and optionally SVG) plus a `manifest.json` into `--out`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod run;
pub mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "fqpe", version, about = "Filtered phase estimation: filters, Krylov filters, costs and sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Seed for anything random; runs are deterministic given flags, inputs and seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write SVG plots.
    #[arg(long)]
    pub emit_svg: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and diagonalize a Hubbard model, write its spectral model JSON.
    Model(ModelArgs),
    /// Design a filter series and optionally report it against a model.
    Filter(FilterArgs),
    /// Krylov (optionally penalized) filter of order N for a model.
    Krylov(KrylovArgs),
    /// Gaussian FQPE plan or two-stage plan.
    Cost(CostArgs),
    /// Relative-cost landscape over prior bias and width.
    SweepGaussian(SweepGaussianArgs),
    /// Krylov order / penalty table.
    SweepKrylov(SweepKrylovArgs),
    /// Worst-case cost over priors in an eps' box.
    WorstCase(WorstCaseArgs),
    /// Krylov, modified Krylov and fitted Gaussian filters side by side.
    Compare(CompareArgs),
    /// Monte Carlo check of the FQPE success probability.
    Mc(McArgs),
    /// Replay a manifest.
    Rerun(RerunArgs),
}

impl Command {
    pub fn common(&self) -> Option<&Common> {
        Some(match self {
            Command::Model(a) => &a.common,
            Command::Filter(a) => &a.common,
            Command::Krylov(a) => &a.common,
            Command::Cost(a) => &a.common,
            Command::SweepGaussian(a) => &a.common,
            Command::SweepKrylov(a) => &a.common,
            Command::WorstCase(a) => &a.common,
            Command::Compare(a) => &a.common,
            Command::Mc(a) => &a.common,
            Command::Rerun(_) => return None,
        })
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// HubbardSpec JSON; overrides the lattice flags.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// `chain:L` or `grid:RxC`.
    #[arg(long, default_value = "chain:7")]
    pub lattice: String,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long = "U", visible_alias = "u", default_value_t = 10.0)]
    pub u: f64,
    #[arg(long, default_value_t = 2)]
    pub nup: usize,
    #[arg(long, default_value_t = 2)]
    pub ndown: usize,
    /// `left_packed` or `spread`.
    #[arg(long, default_value = "left_packed")]
    pub neel: String,
    #[arg(long, value_enum, default_value_t = StartSpin::Up)]
    pub start: StartSpin,
    /// Spectral normalization margin (lambda = margin * max |E|).
    #[arg(long, conflicts_with = "lambda")]
    pub margin: Option<f64>,
    /// Explicit normalization scale.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StartSpin {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    GaussianTrig,
    GaussianCheb,
    MinimaxPoly,
    MinimaxTrig,
    Kaiser,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long, value_enum)]
    pub design: Design,
    /// Series center for Gaussian designs (default: tilde E0 clamped to [-1, 1]).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Prior ground energy (default: exact, from --model).
    #[arg(long)]
    pub e0: Option<f64>,
    /// Prior first excited energy (default: exact, from --model).
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub eps_prime: f64,
    /// Gaussian accuracy target.
    #[arg(long)]
    pub eps_g: Option<f64>,
    /// Minimax / Kaiser half-width of the main lobe.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Minimax / Kaiser order.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct KrylovArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    #[arg(long)]
    pub n: usize,
    /// `zero`, `star` (N eps) or a number.
    #[arg(long, default_value = "zero")]
    pub lambda: String,
    /// Target accuracy in gap units (used by `star` and for the cost).
    #[arg(long, default_value_t = 1e-5)]
    pub eps_over_gap: f64,
    #[arg(long, default_value_t = fqpe::krylov::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CostArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Target accuracy in normalized units.
    #[arg(long, conflicts_with = "eps_over_gap")]
    pub eps: Option<f64>,
    /// Target accuracy in gap units.
    #[arg(long)]
    pub eps_over_gap: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    /// Plan coarse QPE for the priors followed by Gaussian FQPE.
    #[arg(long)]
    pub two_stage: bool,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    #[arg(long, default_value_t = 0.0)]
    pub eps_prime: f64,
    #[arg(long)]
    pub e0: Option<f64>,
    #[arg(long)]
    pub e1: Option<f64>,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepGaussianArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub eps_over_gap: f64,
    /// `lo:hi:n` in gap units.
    #[arg(long, default_value = "-1.5:1.5:61", allow_hyphen_values = true)]
    pub bias: String,
    /// `lo:hi:n` in gap units.
    #[arg(long, default_value = "0.3:3:41")]
    pub width: String,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SweepKrylovArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    /// Comma-separated orders.
    #[arg(long, default_value = "30,40,50,60,70,80,90,100")]
    pub n_list: String,
    /// Comma-separated penalties: `zero`, `star` or numbers.
    #[arg(long, default_value = "zero,star")]
    pub lambda: String,
    #[arg(long, default_value_t = 1e-5)]
    pub eps_over_gap: f64,
    #[arg(long, default_value_t = fqpe::krylov::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct WorstCaseArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated accuracies in gap units, one curve each.
    #[arg(long, default_value = "1e-1,1e-3,1e-5")]
    pub eps_over_gap: String,
    /// `lo:hi:n` prior error bounds.
    #[arg(long, default_value = "0:0.2:11")]
    pub eps_prime: String,
    #[arg(long, default_value = "-1.5:1.5:61", allow_hyphen_values = true)]
    pub bias: String,
    #[arg(long, default_value = "0.3:3:41")]
    pub width: String,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value = "trig")]
    pub basis: String,
    #[arg(long, default_value_t = 60)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub eps_over_gap: f64,
    #[arg(long, default_value_t = fqpe::krylov::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long)]
    pub eps_he: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Model to test with an exact-prior Gaussian filter; without it the built-in scenarios run.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub eps_over_gap: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps_prime: f64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for the replay (default: the recorded one).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse and execute; returns the process exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(std::iter::once("fqpe".to_string()).chain(argv.iter().cloned())) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::execute(cli.command, &argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

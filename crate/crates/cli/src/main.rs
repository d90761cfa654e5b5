mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ezvol::Error;

#[derive(Parser)]
#[command(
    name = "ezvol",
    version,
    about = "Consumption-investment under Heston volatility with Epstein-Zin preferences",
    after_long_help = config::KEYS_HELP
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the value-function coefficients and the optimal strategy.
    Solve(SolveArgs),
    /// Check residuals, first-order conditions and admissibility of a solution.
    Verify(VerifyArgs),
    /// Decide whether an exponential-polynomial guess of given order can solve the HJB equation.
    Ansatz(AnsatzArgs),
    /// Simulate variance and wealth paths under the optimal strategy.
    Simulate(SimulateArgs),
    /// Compare finite-horizon closed forms with a method-of-lines PDE solve.
    Oracle(OracleArgs),
    /// Tabulate the strategy along variance, time or risk aversion.
    Sweep(SweepArgs),
}

#[derive(Args)]
pub struct CaseArg {
    /// auto, inf-unit, inf-general, fin-unit, fin-general or log-utility
    #[arg(long, default_value = "auto")]
    pub case: String,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Run configuration (see `ezvol --help` for keys)
    pub config: PathBuf,
    #[command(flatten)]
    pub case: CaseArg,
    /// JSON output file (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV file for a finite-horizon coefficient path (default: next to --out as *.path.csv)
    #[arg(long)]
    pub path_csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub case: CaseArg,
    /// Residual tolerance (default depends on the case)
    #[arg(long)]
    pub tol: Option<f64>,
    /// Replace the infinite-horizon A1 before checking
    #[arg(long, alias = "override-A1", conflicts_with = "scale_a1")]
    pub override_a1: Option<f64>,
    /// Multiply A1 (every node of a path) by this factor before checking
    #[arg(long, alias = "scale-A1")]
    pub scale_a1: Option<f64>,
    /// Seed of the random first-order-condition states
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Number of random first-order-condition states
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnsatzArgs {
    /// Configuration whose market supplies square-root-volatility degrees when --degrees is absent
    pub config: Option<PathBuf>,
    /// Degree file with lines `eta_sq = ...`, `m1 = ...`, `eta_m2 = ...`, `m2_sq = ...`
    #[arg(long)]
    pub degrees: Option<PathBuf>,
    /// Polynomial order of the exponent
    #[arg(long)]
    pub order: i64,
    /// inf-unit, inf-general, fin-unit or fin-general
    #[arg(long, default_value = "inf-unit")]
    pub case: String,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub gamma: String,
    #[arg(long, default_value = "-1/2", allow_hyphen_values = true)]
    pub rho: String,
    #[arg(long, default_value = "1/8", allow_hyphen_values = true)]
    pub phi: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0.005)]
    pub dt: f64,
    /// Simulated years (default min(T, 10))
    #[arg(long)]
    pub t_sim: Option<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub antithetic: bool,
    /// Keep every k-th step (default: 10 intervals over the run)
    #[arg(long)]
    pub record_every: Option<usize>,
    /// CSV of recorded path nodes
    #[arg(long)]
    pub paths_csv: Option<PathBuf>,
    /// JSON summary (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub case: CaseArg,
    #[arg(long, default_value_t = 0.005)]
    pub nu_min: f64,
    #[arg(long, default_value_t = 0.09)]
    pub nu_max: f64,
    #[arg(long, default_value_t = 61)]
    pub n_nu: usize,
    #[arg(long, default_value_t = 4000)]
    pub n_tau: usize,
    /// Time rows written to --csv
    #[arg(long, default_value_t = 41)]
    pub rows: usize,
    /// Also run at twice the variance resolution and report the ratio
    #[arg(long)]
    pub refine: bool,
    /// Pass threshold for the largest interior relative difference
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SweepArgs {
    pub config: PathBuf,
    /// Preset 1-4: gamma axis (inf-unit), variance axis (inf-general), time axis
    /// (fin-unit), variance axis (fin-general). Explicit flags override its fields
    #[arg(long, alias = "figure")]
    pub preset: Option<u32>,
    /// nu, t or gamma
    #[arg(long)]
    pub axis: Option<String>,
    #[arg(long)]
    pub min: Option<f64>,
    #[arg(long)]
    pub max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
    /// Comma-separated risk aversions, one curve each
    #[arg(long)]
    pub gammas: Option<String>,
    /// inf-unit, inf-general, fin-unit or fin-general
    #[arg(long)]
    pub case: Option<String>,
    #[arg(long)]
    pub t_eval: Option<f64>,
    #[arg(long)]
    pub nu_eval: Option<f64>,
    /// CSV output (default stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit status for a library error: 2 for bad input, 3 for solver failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::AtGamma { source, .. } => exit_code(source),
        Error::Validation(_)
        | Error::InvalidPreferences(_)
        | Error::InvalidInput(_)
        | Error::Parse(_)
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Ansatz(a) => commands::ansatz(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::Sweep(a) => commands::sweep(&a),
    };
    match result {
        Ok(commands::Outcome::Ok) => ExitCode::SUCCESS,
        Ok(commands::Outcome::CheckFailed(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            ExitCode::from(exit_code(&e))
        }
    }
}

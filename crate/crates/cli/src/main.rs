//! `w2d`: batch experiments on sliding-paraboloid contact sets, maximal
//! functions and `W^{2,δ}` diagnostics.
//!
//! Fields are read and written in the `gf1` text format, curves as CSV and
//! reports as JSON. Every run also writes a JSON manifest with the flags and
//! the sha256 of each input and output. On error, outputs already written by
//! the run are removed.

mod artifacts;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use artifacts::Run;

#[derive(Parser)]
#[command(
    name = "w2d",
    version,
    about = "Contact-set and W^{2,delta} experiments on uniform grids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a manufactured solution or a seeded random field.
    Gen(GenArgs),
    /// Contact set of sliding paraboloids of one opening.
    Contact(ContactArgs),
    /// Discrete maximal function of |g| and its weak (1,1) constant.
    Maximal(MaximalArgs),
    /// Check the covering lemma for two mask fields E ⊆ F.
    Cover(CoverArgs),
    /// Contact-set decay curve `k,kappa,alpha`.
    Decay(DecayArgs),
    /// Ball density scan for the measure estimate.
    Density(DensityArgs),
    /// Estimate ratio report for a pair (u, f).
    Verify(VerifyArgs),
    /// Dyadic level-set sum of a nonnegative field.
    Lpsum(LpsumArgs),
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum FamilyArg {
    Constant,
    Affine,
    Quadratic,
    RadialPower,
    Cone,
    SmoothBump,
    Barrier,
    /// Independent uniform values in `[-amplitude, amplitude)`.
    Noise,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SideArg {
    Minus,
    Plus,
    Both,
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RhsSideArg {
    Minus,
    Plus,
}

/// Ellipticity constants of the Pucci operators.
#[derive(Args, Clone, Copy, Debug, Serialize)]
pub struct EllipticityArgs {
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long = "Lambda", default_value_t = 1.0)]
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Space dimension (1 to 3).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Nodes per axis (odd, at least 9).
    #[arg(long = "N", default_value_t = 129)]
    #[serde(rename = "N")]
    pub n: usize,
    /// Constant term for `constant` and `affine`.
    #[arg(long, default_value_t = 0.0)]
    pub c: f64,
    /// Comma-separated slope for `affine`.
    #[arg(long, value_delimiter = ',')]
    pub b: Vec<f64>,
    /// Row-major comma-separated matrix for `quadratic` (identity if omitted).
    #[arg(long, value_delimiter = ',')]
    pub matrix: Vec<f64>,
    /// Exponent for `radial_power`, in (1, 2].
    #[arg(long, default_value_t = 1.5)]
    pub beta: f64,
    /// Width for `smooth_bump`.
    #[arg(long, default_value_t = 0.7)]
    pub width: f64,
    /// Parameter A > 1 for `barrier`.
    #[arg(long = "A", default_value_t = 2.0)]
    #[serde(rename = "A")]
    pub a: f64,
    /// Amplitude for `noise`.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Seed for `noise` (ChaCha8 stream).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write `Δ_p u` for this p in (1, 2].
    #[arg(long)]
    pub rhs_p: Option<f64>,
    /// Also write the singular right-hand side for this γ in [0, 1).
    #[arg(long, conflicts_with = "rhs_p")]
    pub rhs_gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "minus")]
    pub rhs_side: RhsSideArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub ellipticity: EllipticityArgs,
    /// Destination of the right-hand side field.
    #[arg(long)]
    pub rhs_out: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ContactArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long, value_enum, default_value = "minus")]
    pub side: SideArg,
    /// Vertex mask field (nonzero nodes); the closed unit ball if omitted.
    #[arg(long)]
    pub vertices: Option<PathBuf>,
    /// Contact mask as a 0/1 field.
    #[arg(long)]
    pub out: PathBuf,
    /// First-touch heights (one-sided only).
    #[arg(long)]
    pub envelope: Option<PathBuf>,
    /// Summary report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MaximalArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Weak (1,1) report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Extra levels t at which to report both sides of the weak inequality.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CoverArgs {
    /// Mask field for E.
    #[arg(long)]
    pub e: PathBuf,
    /// Mask field for F.
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long)]
    pub theta: f64,
    #[arg(long = "Theta")]
    #[serde(rename = "Theta")]
    pub big_theta: f64,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecayArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long = "M", default_value_t = 2.0)]
    #[serde(rename = "M")]
    pub m: f64,
    #[arg(long, default_value_t = 14)]
    pub kmax: u32,
    #[arg(long, value_enum, default_value = "both")]
    pub side: SideArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Fit report with the decay exponent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct DensityArgs {
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long = "K", default_value_t = 2.0)]
    #[serde(rename = "K")]
    pub k: f64,
    #[arg(long = "M", default_value_t = 8.0)]
    #[serde(rename = "M")]
    pub m: f64,
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eps2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub ellipticity: EllipticityArgs,
    /// Rescale (u, f) first so that ‖u‖∞ ≤ 1/16 and ‖f‖_{L^n} ≤ eps1.
    #[arg(long)]
    pub normalize_eps1: Option<f64>,
    /// Per-ball CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long = "M", default_value_t = 2.0)]
    #[serde(rename = "M")]
    pub m: f64,
    #[arg(long, default_value_t = 14)]
    pub kmax: u32,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct LpsumArgs {
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    #[arg(long = "M", default_value_t = 2.0)]
    #[serde(rename = "M")]
    pub m: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn dispatch(command: &Command, run: &mut Run) -> anyhow::Result<()> {
    match command {
        Command::Gen(a) => {
            commands::gen(a, run)?;
            run.finish("gen", a, a.manifest.as_deref())
        }
        Command::Contact(a) => {
            commands::contact(a, run)?;
            run.finish("contact", a, a.manifest.as_deref())
        }
        Command::Maximal(a) => {
            commands::maximal(a, run)?;
            run.finish("maximal", a, a.manifest.as_deref())
        }
        Command::Cover(a) => {
            commands::cover(a, run)?;
            run.finish("cover", a, a.manifest.as_deref())
        }
        Command::Decay(a) => {
            commands::decay(a, run)?;
            run.finish("decay", a, a.manifest.as_deref())
        }
        Command::Density(a) => {
            commands::density(a, run)?;
            run.finish("density", a, a.manifest.as_deref())
        }
        Command::Verify(a) => {
            commands::verify(a, run)?;
            run.finish("verify", a, a.manifest.as_deref())
        }
        Command::Lpsum(a) => {
            commands::lpsum(a, run)?;
            run.finish("lpsum", a, a.manifest.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut run = Run::new();
    match dispatch(&cli.command, &mut run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            run.cleanup();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

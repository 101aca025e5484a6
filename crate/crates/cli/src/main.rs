//! `hadamard`: command-line front end for hadamard-core.

mod commands;
mod error;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "hadamard", version, about = "Hadamard inverses, contour products and singularity scans of power-series germs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Catalog germ (`name:key=value,...`) or path to a JSON germ file.
    #[arg(short = 'g', long = "germ", global = true)]
    pub germ: Option<String>,
    /// Truncation order N (at least 8).
    #[arg(short = 'N', long = "order", global = true)]
    pub order: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized demos.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients of F and of its Hadamard inverse.
    Inverse,
    /// Euler operator annihilating the inverse of a single-pole rational germ.
    Ode,
    /// F ⊙ G at a point, termwise and by contour integrals.
    Hadamard(HadamardArgs),
    /// Ratio test, Padé sweep and boundary score of the inverse (or of the germ itself).
    Scan(ScanArgs),
    /// (ζ−ω)^M (F⊙G)(ζ) along a ray into ω.
    Probe(ProbeArgs),
    /// Solve the Volterra equation for g₁ and check the inverse conditions.
    Volterra(VolterraArgs),
    /// Run a fixed set of reproductions and randomized checks.
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Contour {
    I,
    C,
    Kj,
    All,
}

#[derive(Debug, Args)]
pub struct HadamardArgs {
    /// The second factor G.
    #[arg(long = "with")]
    pub with: String,
    /// Evaluation point, `re` or `re,im`.
    #[arg(long, default_value = "0.3")]
    pub zeta: String,
    #[arg(long, default_value_t = 0.6)]
    pub radius: f64,
    #[arg(long, default_value_t = 256)]
    pub nodes: usize,
    #[arg(long, value_enum, default_value_t = Contour::All)]
    pub contour: Contour,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Padé orders, e.g. `10,14,18,22` or `8/9,12/13`.
    #[arg(long)]
    pub orders: Option<String>,
    /// Report stable poles inside |z| ≤ window.
    #[arg(long, default_value_t = 2.0)]
    pub window: f64,
    /// Singular points allowed by theory, `;`-separated (`re` or `re,im`).
    #[arg(long)]
    pub expect: Option<String>,
    /// Scan the germ's own coefficients instead of its inverse.
    #[arg(long)]
    pub direct: bool,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Named pair: `example1` (product δ) or `log-decay` (log-type F against a simple pole).
    #[arg(long, conflicts_with = "with")]
    pub pair: Option<String>,
    /// Second factor when F is given with --germ.
    #[arg(long = "with")]
    pub with: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub power: u32,
    #[arg(long, default_value = "1")]
    pub omega: String,
    /// Offsets are 2^{-k} for k in kmin..=kmax.
    #[arg(long, default_value_t = 1)]
    pub kmin: i32,
    #[arg(long, default_value_t = 20)]
    pub kmax: i32,
}

#[derive(Debug, Args)]
pub struct VolterraArgs {
    #[arg(long = "A", default_value = "1")]
    pub a: String,
    #[arg(long = "B", default_value = "1")]
    pub b: String,
    /// `const:c`, `exp:r` (e^{rζ}) or `poly:c0,c1,...`.
    #[arg(long, default_value = "const:1")]
    pub f1: String,
    #[arg(long, default_value = "1")]
    pub omega: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poissym::detsys::DetError;
use poissym::geom::GeomError;
use poissym::noether::NoetherError;

/// Symmetries, Noether currents and curvature for Δ_g u + f(u) = 0.
#[derive(Parser)]
#[command(name = "poissym", version)]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for every sampling step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
pub struct Source {
    /// Manifest file.
    pub manifest: Option<PathBuf>,
    /// Built-in geometry instead of a manifest.
    #[arg(long, conflicts_with = "manifest")]
    pub geometry: Option<String>,
}

#[derive(Args, Clone)]
pub struct ClassArgs {
    /// arbitrary, zero, constant, linear, exponential, power, critical or p2n6.
    #[arg(long)]
    pub class: Option<String>,
    /// Exponent for `power`, e.g. 3 or 1/3.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Constant for `constant`: a number or a parameter name.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
}

#[derive(Args, Clone)]
pub struct GeneratorArgs {
    /// Named vector field from the manifest or fixture.
    #[arg(long, conflicts_with = "xi")]
    pub field: Option<String>,
    /// Inline components, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<String>,
    /// Coefficient of u d/du.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub a: String,
    /// Inhomogeneous part of d/du.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub b: String,
}

#[derive(Subcommand)]
enum Command {
    /// Christoffel symbols, Ricci tensor and scalar curvature.
    Curvature {
        #[command(flatten)]
        src: Source,
    },
    /// Checks a field against the conformal Killing equation, or solves for all of them.
    Killing {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        gen: GeneratorArgs,
        #[arg(long)]
        solve: bool,
        /// Ansatz basis: a file (JSON list or one per line) or a comma separated list.
        #[arg(long)]
        basis: Option<String>,
    },
    /// Lie point symmetries of the equation for one nonlinearity class.
    Classify {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        basis: Option<String>,
    },
    /// Variational, divergence or non-Noether verdict for one generator.
    Noether {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        gen: GeneratorArgs,
    },
    /// Conserved current of a Noether symmetry.
    Current {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        gen: GeneratorArgs,
        /// Numeric samples for verification.
        #[arg(long)]
        verify: Option<usize>,
    },
    /// Full fixture suite.
    Suite {
        #[arg(long, conflicts_with = "all")]
        geometry: Option<String>,
        #[arg(long)]
        all: bool,
    },
    /// Writes a built-in geometry as a manifest.
    Export {
        #[arg(long)]
        geometry: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Geometry(String),
    Symmetry(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Symmetry(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Geometry(m) | CliError::Symmetry(m) => m,
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Singular | GeomError::IndefiniteDeterminant | GeomError::Inconsistent(_) => {
                CliError::Geometry(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<DetError> for CliError {
    fn from(e: DetError) -> Self {
        match e {
            DetError::Geom(g) => g.into(),
            DetError::Sampling => CliError::Geometry(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<NoetherError> for CliError {
    fn from(e: NoetherError) -> Self {
        match e {
            NoetherError::Det(d) => d.into(),
            NoetherError::Geom(g) => g.into(),
            NoetherError::Sampling => CliError::Geometry(e.to_string()),
            _ => CliError::Symmetry(e.to_string()),
        }
    }
}

pub struct Ctx {
    pub json: bool,
    pub seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx {
        json: cli.json,
        seed: cli.seed,
    };
    let res = match cli.cmd {
        Command::Curvature { src } => commands::curvature(&ctx, &src),
        Command::Killing { src, gen, solve, basis } => commands::killing(&ctx, &src, &gen, solve, basis.as_deref()),
        Command::Classify { src, class, basis } => commands::classify(&ctx, &src, &class, basis.as_deref()),
        Command::Noether { src, class, gen } => commands::noether(&ctx, &src, &class, &gen),
        Command::Current { src, class, gen, verify } => commands::current(&ctx, &src, &class, &gen, verify),
        Command::Suite { geometry, all } => commands::suite(&ctx, geometry.as_deref(), all),
        Command::Export { geometry, output } => commands::export(&geometry, output.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

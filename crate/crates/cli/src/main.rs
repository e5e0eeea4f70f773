use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypersq::{Complex64, Tolerances};

mod commands;
mod output;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] hypersq::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Core(hypersq::Error::Domain(_) | hypersq::Error::Singularity(_)) => 2,
            CliError::Core(_) => 1,
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    /// Disc to square.
    Fwd,
    /// Square to disc.
    Inv,
}

/// Conformal geometry of the square: metrics, maps and bound checks.
#[derive(Debug, Parser)]
#[command(name = "hypersq", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Grid resolution (≥ 8)
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Sample count (≥ 1)
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the quadrature and Newton tolerances
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file (standard output if absent)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

impl Common {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let tol = match self.tol {
            Some(t) => Tolerances::default().with_tol(t),
            None => Tolerances::default(),
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn grid_or(&self, default: usize) -> Result<usize, CliError> {
        let g = self.grid.unwrap_or(default);
        if g < 8 {
            return Err(CliError::Input(format!("--grid must be at least 8, got {g}")));
        }
        Ok(g)
    }

    pub fn n_or(&self, default: usize) -> Result<usize, CliError> {
        let n = self.n.unwrap_or(default);
        if n == 0 {
            return Err(CliError::Input("--n must be at least 1".into()));
        }
        Ok(n)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// s-metric, hyperbolic distance and their ratio for two points of the square
    Dist {
        #[arg(allow_hyphen_values = true, value_parser = parse_complex)]
        x: Complex64,
        #[arg(allow_hyphen_values = true, value_parser = parse_complex)]
        y: Complex64,
    },
    /// Local limit 2d/r and conformal radius on an interior grid
    Sweep,
    /// Extremal search for the ratio th(ρ/2)/s
    Maximize {
        /// Pattern-search iterations per refined seed
        #[arg(long, default_value_t = 60)]
        refine: usize,
    },
    /// Check 1 ≤ th(ρ/2)/s ≤ C(λ₀) on random pairs
    Verify,
    /// Constants and sampled inequalities of the proof chain
    Certify,
    /// Conformal map in either direction, with round-trip residual
    Map {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(allow_hyphen_values = true, value_parser = parse_complex)]
        point: Complex64,
    },
}

/// Complex literal such as `0.3-0.4i`, `2`, `-i` or `1e-3+2e-2i`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z: Complex64 = compact.parse().map_err(|_| format!("cannot parse complex number {s:?}"))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("complex number {s:?} is not finite"));
    }
    Ok(z)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("HYPERSQ_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("HYPERSQ_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_threads()?;
    let c = &cli.common;
    match cli.command {
        Command::Dist { x, y } => commands::dist(c, x, y),
        Command::Sweep => commands::sweep(c),
        Command::Maximize { refine } => commands::maximize(c, refine),
        Command::Verify => commands::verify(c),
        Command::Certify => commands::certify(c),
        Command::Map { direction, point } => commands::map(c, direction, point),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("hypersq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

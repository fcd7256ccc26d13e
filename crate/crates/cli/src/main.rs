//! `weylcoef`: Weyl coefficients, high-energy diagnostics and inequality
//! checks of canonical systems from the command line.

mod commands;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weylcoef_core::verify::SuiteName;
use weylcoef_core::Error;

use table::Format;

#[derive(Parser, Debug)]
#[command(name = "weylcoef", version, about = "Weyl coefficients of 2x2 canonical systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Catalog name or path to a JSON model.
    #[arg(long, global = true, default_value = "constant-singular")]
    pub model: String,
    /// Catalog parameters, e.g. `alpha=1,1;beta=2,0`.
    #[arg(long, global = true, default_value = "")]
    pub params: String,
    /// Grid `log:start:stop:count`.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Seed of the first random model in `check`; without it seeds start at 1.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replacement for the constant of the `|q|` band.
    #[arg(long, global = true, hide = true)]
    pub abs_band_constant: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// q(iy) over the grid.
    Q,
    /// t_hat, A, L, d and q(ir) over the grid, with the estimate slacks.
    Asym,
    /// Heuristic checks of the limit conditions.
    Conditions,
    /// Run the inequality suites on the catalog and random models.
    Check {
        /// Restrict to the named suites.
        #[arg(long = "suite")]
        suites: Vec<String>,
        /// Number of random models.
        #[arg(long, default_value_t = 100)]
        n_random: usize,
    },
    /// List the built-in families.
    Catalog,
}

/// Process exit status and message of a failed command.
#[derive(Debug)]
pub enum Failure {
    Model(String),
    Convergence(String),
    Precondition(String),
    Suite(String),
    Io(io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Suite(_) => 1,
            Failure::Model(_) | Failure::Io(_) => 2,
            Failure::Convergence(_) => 3,
            Failure::Precondition(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Model(m) | Failure::Convergence(m) | Failure::Precondition(m) | Failure::Suite(m) => {
                f.write_str(m)
            }
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NoConvergence(_) | Error::StepFailure { .. } => Failure::Convergence(msg),
            Error::NotTraceNormalized { .. }
            | Error::ModeAssumptionViolated(_)
            | Error::NotLimitPoint
            | Error::NoDegenerateStart
            | Error::IntervalValidation(_)
            | Error::ArcGeometry(_)
            | Error::ZeroDiagonalPrimitive { .. } => Failure::Precondition(msg),
            _ => Failure::Model(msg),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    if !(c.tol > 0.0) {
        return Err(Failure::Model(format!("--tol must be positive, got {}", c.tol)));
    }
    let mut out = output(&c.out)?;
    // rows computed before a late failure are still written
    let result = match cli.command {
        Command::Q => commands::cmd_q(c, &mut out),
        Command::Asym => commands::cmd_asym(c, &mut out),
        Command::Conditions => commands::cmd_conditions(c, &mut out),
        Command::Check { suites, n_random } => {
            let names = suites
                .iter()
                .map(|s| s.parse::<SuiteName>().map_err(|e| Failure::Model(e.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            commands::cmd_check(c, &names, n_random, &mut out)
        }
        Command::Catalog => commands::cmd_catalog(c, &mut out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("weylcoef: {f}");
            ExitCode::from(f.code())
        }
    }
}

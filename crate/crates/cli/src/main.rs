//! `pbl`: exact residue-bias counts for partitions into distinct parts, their
//! asymptotic estimates and the verification suites.

mod commands;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbl_core::hp::{DEFAULT_PRECISION, PRECISION_ENV};
use pbl_core::{Exec, ResidueConfig};

use output::Format;

/// Largest `n` accepted for the exact tables.
pub const MAX_N: usize = 100_000;
const PRECISION_RANGE: std::ops::RangeInclusive<usize> = 32..=16_384;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Resource(String),
    #[error("{0} verification check(s) failed")]
    Verification(usize),
    #[error(transparent)]
    Core(#[from] pbl_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pbl_core::Error as E;
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Core(E::InvalidConfig(_) | E::Dimension { .. } | E::Domain(_)) => 2,
            CliError::Core(E::TailBound { .. }) => 1,
            CliError::Core(_) | CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Parser)]
#[command(
    name = "pbl",
    version,
    about = "Residue bias in partitions into distinct parts"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Modulus N.
    #[arg(long = "N", global = true, default_value_t = 2)]
    pub modulus: u32,
    /// Lower bound K: only parts greater than K are allowed.
    #[arg(long = "K", global = true, default_value_t = 0)]
    pub floor: u32,
    #[arg(long, global = true, default_value_t = 1)]
    pub alpha: u32,
    #[arg(long, global = true, default_value_t = 2)]
    pub beta: u32,
    /// Largest n for tables and comparisons.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Single n for `asym`.
    #[arg(long = "n", global = true)]
    pub n: Option<u64>,
    /// Truncation order R of the asymptotic expansion.
    #[arg(long, global = true, default_value_t = 2)]
    pub order: usize,
    /// Working precision in bits.
    #[arg(long, global = true, env = PRECISION_ENV, default_value_t = DEFAULT_PRECISION)]
    pub prec: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run the kernels on a single thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

impl GlobalArgs {
    pub fn cfg(&self) -> Result<ResidueConfig> {
        ResidueConfig::new(self.modulus, self.floor, self.alpha, self.beta)
            .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    pub fn nmax_or(&self, default: usize) -> Result<usize> {
        let n = self.nmax.unwrap_or(default);
        check_n_limit(n)?;
        Ok(n)
    }
}

pub fn check_n_limit(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(CliError::Resource(format!(
            "n = {n} exceeds the limit {MAX_N}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    TwoTerm,
    Simplified,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Conjectures,
    Expansion,
    Lemmas,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact table `n, d_ab, d_ba, diff` for 0 <= n <= nmax.
    Exact,
    /// Asymptotic estimate of d_ab(n) at a single n.
    Asym {
        #[arg(long, value_enum, default_value_t = Method::Full)]
        method: Method,
    },
    /// Exact difference against the asymptotic estimate.
    Compare {
        /// Emit `(1/n, diff n e^{-pi sqrt(n/3)})` instead.
        #[arg(long)]
        scaled: bool,
        /// Keep only n congruent to this residue mod N.
        #[arg(long)]
        residue: Option<u64>,
    },
    /// Integer content of the published tables.
    Tables {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
    },
    /// Data series behind the published figures.
    FigureData {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        which: u8,
        /// Upper end of the n range.
        #[arg(long = "max-n")]
        max_n: Option<usize>,
    },
    /// Run a verification suite; one JSON record per line.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
    },
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if !PRECISION_RANGE.contains(&g.prec) {
        return Err(CliError::Usage(format!(
            "--prec must lie in {}..={}, got {}",
            PRECISION_RANGE.start(),
            PRECISION_RANGE.end(),
            g.prec
        )));
    }
    if g.order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let cfg = g.cfg()?;
    let mut out = open_output(&g.out)?;
    let result = match cli.command {
        Command::Exact => commands::exact(g, &cfg, &mut out),
        Command::Asym { method } => commands::asym(g, &cfg, method, &mut out),
        Command::Compare { scaled, residue } => {
            commands::compare(g, &cfg, scaled, residue, &mut out)
        }
        Command::Tables { which } => commands::tables(g, which, &mut out),
        Command::FigureData { which, max_n } => commands::figure_data(g, which, max_n, &mut out),
        Command::Verify { suite } => commands::verify(g, &cfg, suite, &mut out),
    };
    out.flush()?;
    result
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pbl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

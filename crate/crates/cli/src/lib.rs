//! Command-line frontend for `lattice-defect`.
//!
//! Every physical parameter is an optional flag so that a config file can fill the
//! gaps; precedence is flags, then config file, then built-in defaults.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod reproduce;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use output::{Format, Output};

use config::ConfigFile;

pub const THREADS_ENV: &str = "LATTICE_DEFECT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "lattice-defect",
    version,
    about = "Localized modes of line defects in a square lattice"
)]
#[command(args_override_self = true)]
pub struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the result here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lattice Green's function g(m, n2; omega) in the stop band.
    Greens(GreensArgs),
    /// Localized modes of N defects with mass ratio r.
    Modes(ModesArgs),
    /// Branches r_{N,i}(omega) over a frequency range.
    Branches(BranchesArgs),
    /// Exact field against far-field or band-edge asymptotics.
    Asym(AsymArgs),
    /// Dispersion of the infinite defect line.
    Dispersion(DispersionArgs),
    /// Finite-defect frequencies against the infinite-defect pass band.
    Bracket(BracketArgs),
    /// Localized spectrum of a truncated lattice.
    Oracle(OracleArgs),
    /// Regenerate the data behind each figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rep {
    Auto,
    Double,
    Single,
    Bessel,
    Hyper,
}

#[derive(Debug, Args)]
pub struct GreensArgs {
    #[arg(long)]
    pub omega2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n2: Option<i64>,
    /// Batch mode: every 0 <= m, n2 <= K as CSV.
    #[arg(long, value_name = "K")]
    pub max_index: Option<u32>,
    #[arg(long, value_enum)]
    pub rep: Option<Rep>,
}

#[derive(Debug, Args)]
pub struct ModesArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Emit the displacement field of one mode as CSV.
    #[arg(long)]
    pub field: bool,
    /// 1-based, ascending in omega.
    #[arg(long)]
    pub mode_index: Option<usize>,
    #[arg(long, value_name = "W1,W2")]
    pub window: Option<String>,
}

#[derive(Debug, Args)]
pub struct BranchesArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub omega2_min: Option<f64>,
    #[arg(long)]
    pub omega2_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AsymKind {
    Parallel,
    Perp,
    EdgeBond,
    EdgeDiag,
}

#[derive(Debug, Args)]
pub struct AsymArgs {
    #[arg(long, value_enum)]
    pub kind: Option<AsymKind>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, value_name = "A,B", allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long)]
    pub mode_index: Option<usize>,
    /// Column n1 = p' for the perpendicular kind.
    #[arg(long, allow_negative_numbers = true)]
    pub column: Option<i64>,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BracketArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Half width of the truncated lattice.
    #[arg(long = "L", value_name = "L")]
    pub half_width: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig3a,
    Fig3b,
    Fig3c,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    #[value(name = "appA", alias = "appa")]
    AppA,
    All,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub figure: Option<Figure>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

/// Run a parsed command line and write its result.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let format = cfg.pick_enum(cli.format, "format")?;
    let output = cfg.pick(cli.output.clone(), "output")?;
    let out = match cli.command {
        Command::Greens(a) => commands::greens(&a, &cfg)?,
        Command::Modes(a) => commands::modes(&a, &cfg)?,
        Command::Branches(a) => commands::branches(&a, &cfg)?,
        Command::Asym(a) => commands::asym(&a, &cfg)?,
        Command::Dispersion(a) => commands::dispersion(&a, &cfg)?,
        Command::Bracket(a) => commands::bracket(&a, &cfg)?,
        Command::Oracle(a) => commands::oracle(&a, &cfg)?,
        Command::Reproduce(a) => reproduce::run(&a, &cfg)?,
    };
    let text = out.render(format)?;
    match output {
        Some(path) => std::fs::write(&path, text).map_err(|e| CliError::io(path.display().to_string(), e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// Size the global rayon pool from `LATTICE_DEFECT_THREADS` when set.
pub fn configure_threads(value: Option<&str>) -> Result<(), CliError> {
    let Some(v) = value else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

/// Parse, configure and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let threads = std::env::var(THREADS_ENV).ok();
    let result = configure_threads(threads.as_deref()).and_then(|_| execute(cli));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("lattice-defect: {e}");
            if e.exit_code() == 1 {
                eprintln!("run `lattice-defect --help` for the list of subcommands and flags");
            }
            e.exit_code()
        }
    }
}

//! Command-line front end: parses flags and config files, runs the sweeps,
//! writes result tables and maps the outcome to an exit code.
//!
//! Exit codes: 0 when every check passes, 1 when at least one check fails,
//! 2 on usage, configuration or domain errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use embedconst_core::{Error, Format};

mod checks;
pub mod commands;
pub mod config;

pub use checks::{Checks, Key, CHECK_COLUMNS};
pub use commands::Outcome;
pub use config::{PairArgs, RunConfig, DEFAULT_TOLERANCES};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "embedconst", version, about = "Evaluate and verify explicit embedding constants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub d: Option<u32>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,

    /// Key-value file with geometry, grid, `tau` and `tol.<name>` entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for the result tables.
    #[arg(long, global = true, default_value = "embedconst-out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
    /// Rewrite the golden snapshot instead of comparing against it.
    #[arg(long, global = true)]
    pub bless: bool,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Directory holding `verify_all.json`.
    #[arg(long, global = true)]
    pub golden_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// S, Q, F and the Lieb-type bound, with the comparison claims.
    Constants,
    /// Marcinkiewicz interpolation constants and proof bounds.
    Interp,
    /// Green kernel envelopes and local/global bound constants.
    Kernel,
    /// Spectral embedding ratios on the torus.
    Embed,
    /// Moser-Trudinger series radius and scaling inequality.
    Mt,
    /// Every check plus the golden-snapshot comparison.
    VerifyAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Interp => "interp",
            Command::Kernel => "kernel",
            Command::Embed => "embed",
            Command::Mt => "mt",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

impl Cli {
    pub fn run_config(&self) -> embedconst_core::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                RunConfig::from_config_text(&text)?
            }
            None => RunConfig::default(),
        };
        cfg.output_dir = self.out.clone();
        cfg.format = match self.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
        cfg.bless = self.bless;
        cfg.jobs = self.jobs;
        if let Some(dir) = &self.golden_dir {
            cfg.golden_dir = dir.clone();
        }
        cfg.pair_args = PairArgs { p: self.p, q: self.q, d: self.d, alpha: self.alpha };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Computes the tables of one subcommand.
pub fn execute(command: Command, cfg: &RunConfig) -> embedconst_core::Result<Outcome> {
    let job = || match command {
        Command::Constants => commands::constants::run(cfg),
        Command::Interp => commands::interp::run(cfg),
        Command::Kernel => commands::kernel::run(cfg),
        Command::Embed => commands::embed::run(cfg),
        Command::Mt => commands::mt::run(cfg),
        Command::VerifyAll => commands::verify::run(cfg),
    };
    match cfg.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {n} worker threads: {e}")))?
            .install(job),
        None => job(),
    }
}

/// Runs a subcommand, writes its tables and reports; returns the exit code.
pub fn run(command: Command, cfg: &RunConfig) -> i32 {
    let outcome = match execute(command, cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_code(&e);
        }
    };
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for t in &outcome.tables {
        match t.write(&cfg.output_dir, cfg.format) {
            Ok(path) => {
                let _ = writeln!(w, "wrote {} ({} rows)", path.display(), t.rows.len());
            }
            Err(e) => {
                eprintln!("error: cannot write table {}: {e}", t.name);
                return EXIT_USAGE;
            }
        }
    }
    if command == Command::VerifyAll && cfg.bless {
        let _ = writeln!(w, "blessed {}", commands::verify::golden_path(cfg).display());
    }
    let failures = outcome.failures();
    let _ = writeln!(
        w,
        "{}: {} checks, {} failed",
        command.name(),
        outcome.check_count(),
        failures.len()
    );
    if failures.is_empty() {
        EXIT_PASS
    } else {
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        EXIT_FAIL
    }
}

/// Configuration and domain problems are usage errors; numerical breakdowns
/// during a check count as verification failures.
fn error_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Io(_) | Error::EmptyGrid => EXIT_USAGE,
        Error::Quadrature(_) | Error::Convergence(_) | Error::Overflow(_) => EXIT_FAIL,
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    match cli.run_config() {
        Ok(cfg) => run(cli.command, &cfg),
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

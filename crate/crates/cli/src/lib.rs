//! `magnetodisk` command-line interface.

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::checks::Fault;
use crate::config::{Format, MuRange, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "magnetodisk", version, about = "Magneto-elastic disk solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Number of grid cells.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// LO:HI:STEPS
    #[arg(long = "mu-range", global = true, allow_negative_numbers = true)]
    pub mu_range: Option<MuRange>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long = "inject-fault", global = true, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Smallest eigenpair of the linearized problem.
    Eigen,
    /// Minimize the energy at one coupling.
    Minimize,
    /// Trace the solution branches over a range of couplings.
    Sweep,
    /// Displacement and magnetization fields of the minimizer.
    Fields,
    /// Run the property checks.
    Verify,
}

impl Cli {
    /// Config file (or defaults) with the flags applied. Giving `--mu`
    /// clears a `mu_range` from the file and vice versa.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(mu) = self.mu {
            cfg.mu = Some(mu);
            cfg.mu_range = None;
        }
        if let Some(r) = self.mu_range {
            cfg.mu_range = Some(r);
            cfg.mu = None;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    pub fn execute(&self) -> Result<Vec<PathBuf>, CliError> {
        let cfg = self.resolve()?;
        let out = match self.command {
            Command::Eigen => commands::eigen(&cfg)?,
            Command::Minimize => commands::minimize(&cfg)?,
            Command::Sweep => commands::sweep(&cfg)?,
            Command::Fields => commands::fields(&cfg)?,
            Command::Verify => commands::verify(&cfg, self.inject_fault.unwrap_or_default())?,
        };
        Ok(out.written)
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.execute() {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("magnetodisk: {e}");
            e.exit_code()
        }
    }
}

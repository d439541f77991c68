//! `qcosim` — run SPICE-flavored netlists with quantum-dot devices.
//!
//! Exit codes: 0 success, 1 user error (bad input, with a positioned
//! message), 2 numeric failure.

mod oracle_cmd;
mod output;
mod plot;
mod run;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "qcosim",
    version,
    about = "Classical/quantum circuit co-simulator",
    subcommand_negates_reqs = true
)]
pub struct Cli {
    /// Input netlist (.cir)
    #[arg(required = true)]
    pub input: Option<PathBuf>,

    /// Output directory for result files
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,

    /// Result file format
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,

    /// Override a declared .param (repeatable)
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub set: Vec<String>,

    /// Also render static SVG plots of each result
    #[arg(long)]
    pub plot: bool,

    /// Compare the engine against the Crank-Nicolson oracle on the netlist's
    /// quantum device (requires a stiff drive)
    #[arg(long)]
    pub oracle_compare: bool,

    /// Worker threads for sweeps (falls back to QCOSIM_THREADS)
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,

    /// Run the analysis twice and assert byte-identical results
    #[arg(long)]
    pub seedless: bool,

    #[arg(short, long, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Option<Sub>,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Integrate a Bloch trajectory along a detuning CSV (columns t, eps)
    OracleCsv(oracle_cmd::OracleCsvArgs),
}

/// User error (exit 1) vs numeric failure (exit 2).
pub enum CliError {
    User(String),
    Numeric(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::User(_) => 1,
            CliError::Numeric(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::User(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<qcosim_core::Error> for CliError {
    fn from(e: qcosim_core::Error) -> Self {
        use qcosim_core::Error::*;
        match e {
            Syntax { .. } | Elaborate(_) | Config(_) | Domain { .. } => CliError::User(e.to_string()),
            Topology(_) | Convergence { .. } | ResonanceSingularity { .. } | Numeric(_) => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

fn parse_overrides(set: &[String]) -> Result<BTreeMap<String, f64>, CliError> {
    let mut out = BTreeMap::new();
    for s in set {
        let (name, value) = s
            .split_once('=')
            .ok_or_else(|| CliError::User(format!("--set '{s}': expected NAME=VALUE")))?;
        let v = qcosim_core::netlist::parse_number(value.trim())
            .ok_or_else(|| CliError::User(format!("--set '{s}': malformed number '{value}'")))?;
        out.insert(name.trim().to_ascii_lowercase(), v);
    }
    Ok(out)
}

fn configure_threads(cli: &Cli) {
    let n = cli.threads.or_else(|| {
        std::env::var("QCOSIM_THREADS").ok().and_then(|v| v.parse::<usize>().ok())
    });
    if let Some(n) = n {
        #[cfg(feature = "parallel")]
        {
            // Ignore the error if a pool already exists (e.g. under tests).
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        #[cfg(not(feature = "parallel"))]
        {
            if n > 1 {
                eprintln!("qcosim: built without the 'parallel' feature; --threads {n} ignored");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads(&cli);

    let result = match &cli.command {
        Some(Sub::OracleCsv(args)) => oracle_cmd::run_oracle_csv(args),
        None => {
            let input = cli.input.clone().expect("clap enforces input");
            match parse_overrides(&cli.set) {
                Ok(overrides) => {
                    if cli.oracle_compare {
                        oracle_cmd::run_oracle_compare(&cli, &input, &overrides)
                    } else {
                        run::run_netlist(&cli, &input, &overrides)
                    }
                }
                Err(e) => Err(e),
            }
        }
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcosim: error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

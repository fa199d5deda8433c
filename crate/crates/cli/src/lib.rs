//! Command-line front end: configuration documents, sweeps over them, and
//! CSV/JSON output.

pub mod config;
pub mod plan;
pub mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use config::{parse_config, parse_config_with, ConfigError, Overrides, RunConfig, Task};
pub use plan::PlanPoint;
pub use run::{run, ExitClass, RunError, RunOutcome, CSV_HEADER};

/// Casimir-Lifshitz energies and pressures for a sphere inside a
/// spherical cavity.
#[derive(Debug, Parser)]
#[command(name = "casimir", version)]
pub struct Args {
    /// Configuration document (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; overrides [output] dir.
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Seed for the check task.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Hard cap on angular momentum.
    #[arg(long, value_name = "N")]
    pub lmax: Option<usize>,
    /// Relative tolerance of the frequency quadrature or Matsubara sum.
    #[arg(long, value_name = "X")]
    pub tolerance: Option<f64>,
    /// Suppress progress and summary output.
    #[arg(long)]
    pub quiet: bool,
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitClass::Config.code() } else { 0 };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitClass::Config.code();
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitClass::Config.code();
        }
    };
    let overrides = Overrides {
        output_dir: args.output.clone(),
        seed: args.seed,
        l_max: args.lmax,
        tolerance: args.tolerance,
    };
    let cfg = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}: {e}", args.config.display());
            return ExitClass::Config.code();
        }
    };
    match run(&cfg, !args.quiet) {
        Ok(outcome) => {
            if !args.quiet {
                for line in &outcome.summary {
                    eprintln!("{line}");
                }
                for f in &outcome.files {
                    eprintln!("wrote {}", f.display());
                }
            }
            outcome.exit.code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitClass::Config.code()
        }
    }
}

/// Honour `CASIMIR_THREADS` by sizing the global worker pool.
fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CASIMIR_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("CASIMIR_THREADS must be a positive integer, got `{v}`"))?;
    // a pool built earlier in the same process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

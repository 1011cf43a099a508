//! The `ksb` command line: argument parsing and subcommand execution.

mod config;
mod run;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{parse_config, InitialKind, Settings, KEYS};
pub use run::{kernel_table, scaling, solve, verify, SolveSummary};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad input: configuration, files, unknown names.
pub const EXIT_INVALID: i32 = 1;
/// Exit status for numerical failure or a failing check.
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ksb", version, about = "Kuramoto-Sivashinsky-Burgers mild-form solver and estimate checks")]
pub struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Override one configuration key, e.g. `--set dt=5e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve from the configured initial datum; writes norms.csv,
    /// exit_times.csv and field dumps.
    Solve,
    /// Run one named check, or all of them.
    Verify {
        #[arg(default_value = "all")]
        check: String,
    },
    /// Tabulate the L-KS and BTBM kernels with a calibrated envelope.
    KernelTable {
        /// Comma-separated times.
        #[arg(long, default_value = "0.01,0.1,1", value_delimiter = ',')]
        times: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        r_max: f64,
        /// Radii per time, evenly spaced on `[0, r_max]`.
        #[arg(long, default_value_t = 41)]
        r_count: usize,
    },
    /// Fit the kernel-norm power laws in time.
    Scaling {
        /// Window of the L^1 fits, `lo,hi`.
        #[arg(long, default_value = "1e-3,1e-1", value_delimiter = ',', num_args = 2)]
        l1_window: Vec<f64>,
        /// Window of the L^q fit, `lo,hi`.
        #[arg(long, default_value = "1e-5,1e-3", value_delimiter = ',', num_args = 2)]
        lq_window: Vec<f64>,
    },
}

/// Caps the global worker pool from `LKS_THREADS` (0 or unset: automatic).
fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LKS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("LKS_THREADS must be a nonnegative integer, got `{raw}`"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return EXIT_INVALID;
    }
    run::execute(&cli)
}

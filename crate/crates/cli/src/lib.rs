//! Command-line front end for the two-frames filters.
//!
//! `validate` checks a system for naturality and group-affinity, `bench`
//! runs the inertial-navigation Monte-Carlo comparison and writes CSVs,
//! `selftest` runs the built-in numerical checks.

pub mod bench;
pub mod checks;
pub mod config;
pub mod selftest;
pub mod validate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use twoframes::scenarios::monte_carlo::FilterKind;
use twoframes::TfgError;

use crate::bench::RunManifest;
use crate::config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "twoframes",
    version,
    about = "Two-frames group filters: validation, benchmark, self-test"
)]
pub struct Cli {
    /// TOML configuration; built-in defaults when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the Monte-Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the number of Monte-Carlo runs.
    #[arg(long, global = true)]
    pub runs: Option<usize>,
    /// Output directory for `bench`.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Comma-separated filters for `bench` (tfg, imperfect, mekf).
    #[arg(long, global = true, value_delimiter = ',')]
    pub filters: Option<Vec<FilterKind>>,
    /// Prints the resolved configuration and exits.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Checks naturality and group-affinity of the configured systems.
    Validate,
    /// Monte-Carlo comparison of the filters on inertial navigation.
    Bench {
        /// Reruns exactly the experiment recorded in a manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Runs the built-in numerical checks.
    Selftest {
        /// Multiplies every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

/// Exit code for an error.
pub fn exit_code(e: &TfgError) -> i32 {
    match e {
        TfgError::SingularInnovationCovariance(_)
        | TfgError::AngleNearPi
        | TfgError::SingularNu
        | TfgError::NotRotation(_) => EXIT_NUMERICAL,
        TfgError::Config(_) | TfgError::Io(_) => EXIT_CONFIG,
        TfgError::ShapeMismatch(_) | TfgError::FrameMismatch | TfgError::Unsupported(_) => {
            EXIT_CONFIG
        }
    }
}

/// Applies command-line overrides to the loaded configuration.
pub fn resolve_config(cli: &Cli) -> Result<Config, TfgError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.monte_carlo.seed = seed;
    }
    if let Some(runs) = cli.runs {
        cfg.monte_carlo.runs = runs;
    }
    if let Some(filters) = &cli.filters {
        cfg.monte_carlo.filters = filters.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<i32, TfgError> {
    if let Command::Bench {
        manifest: Some(path),
    } = &cli.command
    {
        let manifest = RunManifest::load(path)?;
        if cli.print_config {
            print!("{}", manifest.config.to_toml());
            return Ok(EXIT_OK);
        }
        return bench_with(&manifest);
    }
    let cfg = resolve_config(cli)?;
    if cli.print_config {
        print!("{}", cfg.to_toml());
        return Ok(EXIT_OK);
    }
    match &cli.command {
        Command::Validate => {
            let reports = validate::run_validate(&cfg, cfg.monte_carlo.seed)?;
            for r in &reports {
                print!("{r}");
            }
            Ok(if reports.iter().all(|r| r.passed()) {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
        Command::Bench { .. } => {
            bench_with(&RunManifest::new(&cfg, cli.config.as_deref(), &cli.out))
        }
        Command::Selftest { tolerance_scale } => {
            if !(tolerance_scale.is_finite() && *tolerance_scale > 0.0) {
                return Err(TfgError::Config("tolerance scale must be positive".into()));
            }
            let results =
                selftest::run_selftest(checks::library_exp, cfg.monte_carlo.seed, *tolerance_scale);
            for r in &results {
                println!("{r}");
            }
            Ok(if results.iter().all(|r| r.passed()) {
                EXIT_OK
            } else {
                EXIT_VALIDATION
            })
        }
    }
}

fn bench_with(manifest: &RunManifest) -> Result<i32, TfgError> {
    let (result, written) = bench::run_bench(manifest)?;
    print!("{}", bench::summary_table(&result));
    let mut ranked: Vec<_> = result
        .traces
        .iter()
        .map(|t| (t.final_rmse()[0], t.kind.name()))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let order: Vec<&str> = ranked.iter().map(|r| r.1).collect();
    println!("final attitude ordering: {}", order.join(" < "));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(EXIT_OK)
}

/// Parses `args` and runs; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

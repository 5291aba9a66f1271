//! Command-line front end. Exit codes: 0 when every check passes, 1 on a
//! theorem-bound violation, 2 on configuration or I/O errors.

pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_correlations, cmd_ids, cmd_sample, cmd_verify, CliError, Outcome};
pub use config::{ConfigError, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lattice-ids",
    version,
    about = "Integrated density of states of the Wilson Dirac operator in random gauge fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated master seeds (overrides `seeds`).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample gauge configurations and write WGF1 files.
    Sample(Common),
    /// Compute IDS curves on the nested cubes.
    Ids {
        #[command(flatten)]
        common: Common,
        /// Skip sampling and use the trivial gauge field U ≡ 1.
        #[arg(long)]
        free_field: bool,
        /// WGF1 files to analyse instead of sampling.
        files: Vec<PathBuf>,
    },
    /// Run the bound and consistency checks.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Flip the sign of the forward hops to exercise the checks.
        #[arg(long)]
        self_test: bool,
    },
    /// Estimate plaquette correlations and Cesàro averages.
    Correlations(Common),
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seeds) = &common.seeds {
        cfg.seeds = seeds.clone();
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    cfg.validate()?;
    log::info!("config: {}", cfg.canonical());
    let threshold = cfg.dobrushin_threshold()?;
    log::info!("beta = {} vs Dobrushin threshold {threshold}", cfg.beta);
    let out = cfg.out.clone();
    Ok((cfg, out))
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Sample(common) => {
            let (cfg, out) = load(&common)?;
            let (outcome, files) = cmd_sample(&cfg, &out)?;
            println!("wrote {} configuration files to {}", files.len(), out.display());
            Ok(outcome)
        }
        Command::Ids {
            common,
            free_field,
            files,
        } => {
            let (cfg, out) = load(&common)?;
            cmd_ids(&cfg, &out, &files, free_field)
        }
        Command::Verify { common, self_test } => {
            let (cfg, out) = load(&common)?;
            cmd_verify(&cfg, &out, self_test)
        }
        Command::Correlations(common) => {
            let (cfg, out) = load(&common)?;
            cmd_correlations(&cfg, &out)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match dispatch(cli.command) {
        Ok(Outcome::Pass) => EXIT_PASS,
        Ok(Outcome::Violation) => {
            eprintln!("error: at least one check failed");
            EXIT_VIOLATION
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_ERROR
        }
    }
}

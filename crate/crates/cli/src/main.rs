//! `qlbm`: benchmarks, verification suites and complexity tables.
//!
//! Exit status: 0 when every check passes, 1 on invalid input or I/O
//! failure, 2 when a check fails.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Outcome, Suite};
use config::{BenchConfig, ComplexityConfig, RawConfig};

#[derive(Parser, Debug)]
#[command(name = "qlbm", version, about = "Classical emulation of quantum lattice-Boltzmann algorithms")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `out`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomised suites (overrides `seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Check tolerance (overrides `tol`).
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Benchmark path (overrides `path`).
    #[arg(long, global = true, value_parser = ["classical", "marching", "dilated", "qlsa"])]
    path: Option<String>,
    /// Verification suite.
    #[arg(long, global = true, value_enum, default_value = "all")]
    suite: Suite,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian hill benchmarks.
    Bench,
    /// Invariant suites selected by `--suite`.
    Verify,
    /// Analytic query counts of both algorithms.
    Complexity,
    /// List the recognised configuration keys.
    Keys,
}

fn load(cli: &Cli) -> Result<RawConfig, config::ConfigError> {
    let mut raw = match &cli.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| config::ConfigError {
            key: kv.clone(),
            message: "expected KEY=VALUE".into(),
        })?;
        raw.set(k.trim(), v.trim())?;
    }
    let flags = [
        ("out", cli.out.as_ref().map(|p| p.display().to_string())),
        ("seed", cli.seed.map(|s| s.to_string())),
        ("tol", cli.tol.map(|t| t.to_string())),
        ("path", cli.path.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            raw.set(k, &v)?;
        }
    }
    Ok(raw)
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let raw = load(cli)?;
    match cli.command {
        Command::Bench => commands::bench(&BenchConfig::from_raw(&raw)?),
        Command::Verify => {
            let common = config::common(&raw)?;
            commands::verify(cli.suite, &config::suite_config(&raw)?, &common.out)
        }
        Command::Complexity => {
            let common = config::common(&raw)?;
            commands::complexity(&ComplexityConfig::from_raw(&raw)?, &common.out)
        }
        Command::Keys => {
            for (k, doc) in config::KEYS {
                println!("{k:<20} {doc}");
            }
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail(failures)) => {
            eprintln!("{} check(s) failed:", failures.len());
            for f in &failures {
                eprintln!("  {f}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

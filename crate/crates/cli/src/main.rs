//! `logkdv`: reproduce tables, sweep parameters and emit plot data as CSV.

mod commands;
mod config;
mod output;
mod reference;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "logkdv", version, about = "Periodic traveling waves of the log-KdV equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct one wave and print its samples.
    Wave(Common),
    /// Eigenvalues of the discretized Hill operator.
    Spectrum(Common),
    /// θ index and its spectral cross-check for one wave.
    Theta(Common),
    /// Period and θ for the reference waves.
    Table1(Common),
    /// Fixed-period derivatives and verdicts for the reference waves.
    Table2(Common),
    /// Phase-plane orbits for plotting.
    Portrait(Common),
    /// Evolve a perturbed wave and track (t, E, F, M, ρ).
    Evolve(Common),
    /// Stability indicators over an (ω, A) grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Grid size (samples per period; samples per orbit for `portrait`).
    #[arg(long)]
    grid: Option<usize>,
    /// `VALUE` sets `ode_tol`; `NAME=VALUE` sets any tolerance. Repeatable.
    #[arg(long)]
    tol: Vec<String>,
    /// Worker threads for table rows and sweep cells.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Override any config key. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn split(&self) -> (&'static str, &Common) {
        match self {
            Command::Wave(c) => ("wave", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Theta(c) => ("theta", c),
            Command::Table1(c) => ("table1", c),
            Command::Table2(c) => ("table2", c),
            Command::Portrait(c) => ("portrait", c),
            Command::Evolve(c) => ("evolve", c),
            Command::Sweep(c) => ("sweep", c),
        }
    }
}

fn key_value(text: &str) -> Result<(&str, &str), ConfigError> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: text.to_string(),
        })
}

fn resolve(name: &'static str, args: &Common) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(name, path)?,
        None => RunConfig::new(name),
    };
    if let Some(n) = args.grid {
        cfg.set("grid", &n.to_string())?;
    }
    for t in &args.tol {
        if t.contains('=') {
            let (k, v) = key_value(t)?;
            if !cfg.is_tolerance(k) {
                return Err(ConfigError::UnknownKey {
                    key: k.to_string(),
                    command: name,
                });
            }
            cfg.set(k, v)?;
        } else {
            cfg.set("ode_tol", t)?;
        }
    }
    for s in &args.set {
        let (k, v) = key_value(s)?;
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    let cfg = match resolve(name, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("logkdv {name}: {e}");
            return ExitCode::from(2);
        }
    };
    if args.parallel == 0 {
        eprintln!("logkdv {name}: --parallel must be at least 1");
        return ExitCode::from(2);
    }
    let table = match commands::run(&cfg, args.parallel) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("logkdv {name}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let text = table.render(&cfg);
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("logkdv {name}: cannot write {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    if table.failures > 0 {
        eprintln!("logkdv {name}: {} row(s) failed", table.failures);
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}

//! `twoflux` command-line harness: runs, viscous comparisons, randomized
//! property suites and convergence studies driven by JSON scenario files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use twoflux::scenario::{apply_override, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] twoflux::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Usage(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical aborts.
    pub fn exit_code(&self) -> u8 {
        use twoflux::Error as E;
        match self {
            CliError::Core(E::PlateauCollapse { .. } | E::RestartCap { .. } | E::Invariant(_) | E::BlowUp { .. }) => 3,
            CliError::Core(_) | CliError::Io { .. } | CliError::Usage(_) => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "twoflux", version, about = "Front tracking and vanishing viscosity for two-flux conservation laws")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; defaults to the scenario's `output_dir`, then `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized data and property trials.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a scenario key, e.g. `--set horizon=0.5` or `--set flux.gap=2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Worker threads for trials and ladders.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tracked run with profiles, events and diagnostics.
    Run,
    /// Tracked solution against the viscous (ε, δ) ladder.
    Compare,
    /// Randomized property trials with worst margins.
    Properties,
    /// ν-ladder (and viscous ladder) convergence tables.
    Converge,
}

/// A validated scenario with its hash and output directory.
pub struct Loaded {
    pub config: ScenarioConfig,
    pub hash: String,
    pub out: PathBuf,
}

fn load(cli: &Cli) -> CliResult<Loaded> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| twoflux::Error::Config(format!("{}: {e}", path.display())))?;
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        apply_override(&mut doc, k.trim(), v.trim())?;
    }
    if let Some(seed) = cli.seed {
        let seed = seed.to_string();
        if doc.get("properties").is_some_and(Value::is_object) {
            apply_override(&mut doc, "properties.seed", &seed)?;
        }
        if doc.pointer("/initial/name").and_then(Value::as_str) == Some("random_piecewise") {
            apply_override(&mut doc, "initial.seed", &seed)?;
        }
    }
    let config = ScenarioConfig::from_value(doc)?;
    let hash = output::config_hash(&config);
    let out = cli
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok(Loaded { config, hash, out })
}

fn execute(cli: &Cli) -> CliResult<u8> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        // a pool may already exist when embedded; the setting is best effort
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let loaded = load(cli)?;
    match cli.command {
        Command::Run => commands::run(&loaded),
        Command::Compare => commands::compare(&loaded),
        Command::Properties => commands::properties(&loaded),
        Command::Converge => commands::converge(&loaded),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numerical_aborts_map_to_three() {
        let e = CliError::Core(twoflux::Error::BlowUp { steps: 10 });
        assert_eq!(e.exit_code(), 3);
        assert_eq!(CliError::Core(twoflux::Error::Config("x".into())).exit_code(), 2);
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
    }

    #[test]
    fn cli_parses_global_flags_after_the_subcommand() {
        let cli = Cli::try_parse_from(["twoflux", "run", "--config", "a.json", "--set", "nu=4", "--set", "horizon=1"]).unwrap();
        assert!(matches!(cli.command, Command::Run));
        assert_eq!(cli.overrides, ["nu=4", "horizon=1"]);
    }
}

//! Command-line harness: `attack`, `spectral`, `sweep` and `selftest`, each a
//! deterministic function of its `key=value` config and master seed.

mod commands;
mod config;
mod selftest;

pub use commands::{
    attack_header, attack_rows, cmd_attack, cmd_spectral, cmd_sweep, run_trials, sweep_header,
    SPECTRAL_CSV_HEADER,
};
pub use config::{
    BetaUnits, ExperimentConfig, Family, KeyValues, RowFunctionSpec, SpectralConfig, SweepCell,
    SweepConfig, EXPERIMENT_KEYS, MAX_SWEEP_CELLS,
};
pub use selftest::{checks_csv, run_checks, Check};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::attack::AttackError;
use crate::randmat::MatrixError;

pub const SCHEMA_LINE: &str = "#schema=1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<AttackError> for CliError {
    fn from(e: AttackError) -> Self {
        match e {
            AttackError::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Attack,
    Spectral,
    Sweep,
    Selftest,
}

/// Command-line flags that override the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

fn read_config(path: Option<&Path>, seed: Option<u64>) -> Result<String, CliError> {
    let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    if let Some(seed) = seed {
        let mut kv = KeyValues::parse(&text)?;
        kv.take("master_seed");
        text = kv
            .keys()
            .map(|k| format!("{k}={}\n", kv.get(k).expect("listed")))
            .collect::<String>()
            + &format!("master_seed={seed}\n");
    }
    Ok(text)
}

fn emit(text: &str, path: Option<&Path>, stdout: &mut (dyn Write + Send)) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => Ok(stdout.write_all(text.as_bytes())?),
    }
}

fn dispatch(
    cmd: Command,
    config: Option<&Path>,
    ov: &Overrides,
    stdout: &mut (dyn Write + Send),
) -> Result<(), CliError> {
    match cmd {
        Command::Attack => {
            let cfg = ExperimentConfig::from_text(&read_config(config, ov.seed)?)?;
            let out = ov.out.clone().or(cfg.output.clone());
            emit(&cmd_attack(&cfg)?, out.as_deref(), stdout)
        }
        Command::Spectral => {
            let cfg = SpectralConfig::from_text(&read_config(config, ov.seed)?)?;
            let out = ov.out.clone().or(cfg.output.clone());
            emit(&cmd_spectral(&cfg)?, out.as_deref(), stdout)
        }
        Command::Sweep => {
            let cfg = SweepConfig::from_text(&read_config(config, ov.seed)?)?;
            let out = ov.out.clone().or(cfg.output.clone());
            cmd_sweep(&cfg, out.as_deref(), stdout)
        }
        Command::Selftest => {
            let checks = run_checks(ov.seed.unwrap_or(0));
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
            emit(&checks_csv(&checks), ov.out.as_deref(), stdout)?;
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Runtime(format!(
                    "{} self-checks failed: {}",
                    failed.len(),
                    failed.iter().map(|c| c.name).collect::<Vec<_>>().join(", ")
                )))
            }
        }
    }
}

/// Runs one subcommand on a worker pool of the requested size and returns the
/// process exit code; errors are reported on stderr.
pub fn run(cmd: Command, config: Option<&Path>, ov: &Overrides, stdout: &mut (dyn Write + Send)) -> i32 {
    let result = match ov.workers {
        Some(0) => Err(CliError::Config("--workers must be at least 1".into())),
        workers => rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cmd, config, ov, stdout))),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

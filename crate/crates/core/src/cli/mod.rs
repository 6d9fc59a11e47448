//! `relaxkin run|sweep <config.json>`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse failure, 3 validation or
//! regime failure, 4 numerical failure. Failures print one JSON line on
//! stderr and leave no output files.

mod config;
mod report;
mod scenarios;
mod sweep;

use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use relaxkin::Error;

use config::{parameters, Format, ScenarioConfig, ScenarioKind};
use report::{Quantity, ScenarioOutput, Summary};

const DEFAULT_OUT_DIR: &str = "relaxkin-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorKind {
    Io,
    Parse,
    Validation,
    Numerical,
}

#[derive(Debug)]
pub struct CliError {
    kind: ErrorKind,
    message: String,
}

impl CliError {
    pub fn parse(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Parse, message: msg.into() }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Validation, message: msg.into() }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Io, message: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Io => 1,
            ErrorKind::Parse => 2,
            ErrorKind::Validation => 3,
            ErrorKind::Numerical => 4,
        }
    }

    fn json_line(&self) -> String {
        serde_json::json!({"error": self.kind, "exit_code": self.exit_code(), "message": self.message}).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::NonFinite(_)
            | Error::StepSizeUnderflow { .. }
            | Error::NonDecaying { .. }
            | Error::Singular(_)
            | Error::NoLinearWindow { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        };
        Self { kind, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "relaxkin", version, about = "Relaxation and reaction kinetics scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run any scenario config.
    Run(RunArgs),
    /// Run a sweep config (scenario "sweep").
    Sweep(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario config, or a summary.json from an earlier run.
    config: PathBuf,
    /// Output directory (overrides the config's output.dir).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; machine parallelism by default.
    #[arg(long)]
    workers: Option<NonZeroUsize>,
    /// Master seed (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Table format (overrides the config's output.format).
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn dispatch(cfg: &ScenarioConfig, seed: u64) -> Result<ScenarioOutput, CliError> {
    match cfg.scenario {
        ScenarioKind::ThreeState => scenarios::three_state(&parameters(&cfg.parameters)?),
        ScenarioKind::RadicalPair => scenarios::radical_pair(&parameters(&cfg.parameters)?),
        ScenarioKind::Radii => scenarios::radii(&parameters(&cfg.parameters)?),
        ScenarioKind::Oracle => scenarios::oracle(&parameters(&cfg.parameters)?, seed),
        ScenarioKind::Sweep => sweep::sweep(&parameters(&cfg.parameters)?),
    }
}

fn execute(command: Command) -> Result<Vec<PathBuf>, CliError> {
    let (sweep_only, args) = match command {
        Command::Run(a) => (false, a),
        Command::Sweep(a) => (true, a),
    };
    let mut cfg = config::load(&args.config)?;
    if sweep_only && cfg.scenario != ScenarioKind::Sweep {
        return Err(CliError::validation("the sweep command needs a config with scenario \"sweep\""));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    cfg.seed = Some(seed);
    let format = args.format.or(cfg.output.format).unwrap_or(Format::Csv);
    let dir = args
        .out_dir
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.map_or(0, NonZeroUsize::get))
        .build()
        .map_err(|e| CliError::io(format!("worker pool: {e}")))?;
    let start = Instant::now();
    let out = pool.install(|| dispatch(&cfg, seed))?;
    let table = out.table.map(|t| t.select(cfg.output.observables.as_deref())).transpose()?;
    let stem = if cfg.scenario == ScenarioKind::Sweep { "sweep" } else { "timeseries" };

    let summary = Summary {
        inputs: &cfg,
        outputs: &out.outputs,
        flags: &out.flags,
        validity: &out.validity,
        wall_time_s: Quantity::new(start.elapsed().as_secs_f64(), "s"),
    };
    report::write_all(&dir, &summary, table.as_ref().map(|t| (stem, t)), format)
}

/// Parses `std::env::args`, runs, and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            let err = CliError::parse(first);
            eprintln!("{}", err.json_line());
            return err.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{}", e.json_line());
            e.exit_code()
        }
    }
}

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use cantorvar::{Error, Mode};
use clap::{Parser, Subcommand, ValueEnum};

use config::{ExperimentConfig, SCHEMA};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Library(Error),
    Other(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> CliError {
        CliError::Library(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Library(Error::CapExceeded(_)) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Other(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Float => Mode::Float,
        }
    }
}

/// Verification suite and sweeps for norm variation of bilinear averages
/// over d-adic Cantor groups.
#[derive(Debug, Parser)]
#[command(name = "cantorvar", version)]
struct Cli {
    /// JSON experiment configuration (`"schema": 1`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Arithmetic backend; overrides the configuration.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Output file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the named checks and print one JSON record per check.
    Verify,
    /// Variation sums of bilinear averages along a scale ladder, as CSV.
    Variation,
    /// Epsilon-jump counts of ergodic averages on a finite system, as CSV.
    Jumps,
    /// The constants c_p and C_p, as CSV.
    Cp {
        /// Exponents; overrides the configuration.
        #[arg(value_delimiter = ',')]
        p: Vec<u32>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig, CliError> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::defaults());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
    match value.get("schema").and_then(|s| s.as_u64()) {
        Some(s) if s == SCHEMA as u64 => {}
        Some(s) => {
            return Err(CliError::Config(format!(
                "unsupported schema {s}, expected {SCHEMA}"
            )))
        }
        None => return Err(CliError::Config("missing integer field \"schema\"".into())),
    }
    serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))
}

fn configure_pool(jobs: Option<usize>) -> Result<(), CliError> {
    let Some(n) = jobs else { return Ok(()) };
    if n == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Other(e.to_string()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool, CliError> {
    configure_pool(cli.jobs)?;
    let mut cfg = load_config(cli.config.as_ref())?;
    let seed = cli.seed.or(cfg.seed);
    let mode = cli.mode.map(Mode::from).or(cfg.mode);
    let out = cli.out.or(cfg.out.take());

    let output = match cli.command {
        Command::Verify => {
            if let Some(s) = seed {
                cfg.verify.seed = s;
            }
            if mode.is_some() {
                cfg.verify.mode = mode;
            }
            commands::verify(&cfg.verify)?
        }
        Command::Variation => commands::variation(
            &cfg.variation,
            seed.unwrap_or(1),
            mode.unwrap_or(Mode::Float),
        )?,
        Command::Jumps => {
            if mode == Some(Mode::Exact) {
                return Err(CliError::Config(
                    "jump counts are computed in float mode only".into(),
                ));
            }
            commands::jumps(&cfg.jumps, seed.unwrap_or(1))?
        }
        Command::Cp { p } => {
            if mode == Some(Mode::Exact) {
                return Err(CliError::Config(
                    "c_p is computed in float mode only".into(),
                ));
            }
            if !p.is_empty() {
                cfg.cp.p_list = p;
            }
            commands::cp(&cfg.cp)?
        }
    };

    match out {
        Some(path) => std::fs::write(&path, output.text)
            .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?,
        None => print!("{}", output.text),
    }
    Ok(output.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! The `vdg` command-line tool.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

pub use commands::{
    cmd_build, cmd_check, cmd_stats, cmd_sweep, cmd_synth, BuildReport, CheckReport, SweepParam,
    SweepSpec, SynthReport,
};
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Core(#[from] vdg_core::Error),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use vdg_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidParams(_)
                | E::Property(_)
                | E::Mismatch(_)
                | E::Unsupported(_)
                | E::CapExceeded { .. }
                | E::Format { .. }
                | E::Invariant { .. },
            ) => EXIT_USAGE,
            _ => EXIT_INTERNAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vdg",
    version,
    about = "Model checker for the iterated volunteer's dilemma"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the state space, write it to disk and report its growth.
    Build {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cap: Option<u64>,
    },
    /// Check a property against the model.
    Check {
        #[arg(long)]
        config: PathBuf,
        /// Property text, or `@file`. Defaults to every `property` in the config.
        #[arg(long)]
        prop: Option<String>,
        /// Print Y/N/M state counts.
        #[arg(long)]
        classify: bool,
        /// Dump per-state values.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Synthesize an optimal strategy and write it as DOT.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        prop: String,
        #[arg(long)]
        dot: PathBuf,
    },
    /// Evaluate a property over a parameter grid and truncated horizons.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of r_init, r_needed, f, k_max.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long)]
        values: String,
        #[arg(long)]
        prop: String,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Report statistics of a saved model.
    Stats {
        #[arg(long)]
        model: PathBuf,
    },
}

/// Runs the tool and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn thread_hint(cfg: Option<&RunConfig>) -> Result<Option<usize>, CliError> {
    match std::env::var("VDG_THREADS") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("VDG_THREADS: `{v}` is not a thread count"))),
        Err(_) => Ok(cfg.and_then(|c| c.threads)),
    }
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = match &cli.command {
        Command::Build { config, .. }
        | Command::Check { config, .. }
        | Command::Synth { config, .. }
        | Command::Sweep { config, .. } => Some(RunConfig::load(config)?),
        Command::Stats { .. } => None,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_hint(cfg.as_ref())? {
        pool = pool.num_threads(t);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    // Output is buffered so the command can run inside the pool.
    let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
    let result = pool.install(|| dispatch(cli.command, cfg, &mut buf_out, &mut buf_err));
    out.write_all(&buf_out)?;
    err.write_all(&buf_err)?;
    result
}

fn dispatch(
    command: Command,
    cfg: Option<RunConfig>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let mut cfg = cfg.unwrap_or_default();
    match command {
        Command::Build { out: dir, cap, .. } => {
            if let Some(dir) = dir {
                cfg.out_dir = dir;
            }
            if let Some(cap) = cap {
                cfg.state_cap = cap;
            }
            let report = cmd_build(&cfg)?;
            writeln!(out, "model written to {}", report.model_path.display())?;
            out.write_all(report.text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Check {
            prop,
            classify,
            csv,
            ..
        } => {
            let props = match prop {
                Some(p) => vec![commands::property_text(&p)?],
                None if cfg.properties.is_empty() => {
                    return Err(CliError::Usage(
                        "no --prop given and no property in config".into(),
                    ))
                }
                None => cfg.properties.clone(),
            };
            if csv.is_some() && props.len() > 1 {
                return Err(CliError::Usage("--csv needs a single property".into()));
            }
            let mut code = EXIT_OK;
            for p in &props {
                let report = cmd_check(&cfg, p, classify, csv.as_deref())?;
                for w in &report.result.warnings {
                    writeln!(err, "warning: {w}")?;
                }
                if props.len() > 1 {
                    writeln!(out, "{}", report.property)?;
                }
                out.write_all(report.text.as_bytes())?;
                if report.result.verdict == Some(false) {
                    code = EXIT_FALSE;
                }
            }
            Ok(code)
        }
        Command::Synth { prop, dot, .. } => {
            let report = cmd_synth(&cfg, &commands::property_text(&prop)?, &dot)?;
            out.write_all(report.text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Sweep {
            param,
            values,
            prop,
            csv,
            ..
        } => {
            let spec = SweepSpec::new(&param, &values, &commands::property_text(&prop)?)?;
            out.write_all(cmd_sweep(&cfg, &spec, &csv)?.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Stats { model } => {
            out.write_all(cmd_stats(&model)?.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

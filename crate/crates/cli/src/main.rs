mod commands;
mod config;
mod error;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Output;
use crate::config::{load_config, Overrides, RunConfig};
use crate::error::CliError;

/// Build and audit non-malleable codes. Exit status: 0 when every measured quantity
/// respects its claimed bound, 1 when one does not, 2 on error.
#[derive(Debug, Parser)]
#[command(name = "nmcode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a code and print its parameters and regime.
    Code {
        #[command(subcommand)]
        action: CodeAction,
    },
    /// AMD codes.
    Amd {
        #[command(subcommand)]
        action: AuditAction,
    },
    /// Coset wiretap codes.
    Wt {
        #[command(subcommand)]
        action: AuditAction,
    },
    /// LECSS codes.
    Lecss {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// Non-malleability audits.
    Nm {
        #[command(subcommand)]
        action: AuditAction,
    },
    /// Non-malleable message transmission over wires.
    Smt {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Closed-form rates, bounds and regimes.
    Bounds {
        /// One of capacity, c1, c2, regime-c1, regime-c2.
        query: String,
    },
}

#[derive(Debug, Subcommand)]
enum CodeAction {
    Build,
}

#[derive(Debug, Subcommand)]
enum AuditAction {
    Audit,
}

#[derive(Debug, Subcommand)]
enum VerifyAction {
    Verify,
}

#[derive(Debug, Subcommand)]
enum RunAction {
    Run,
}

fn configure(o: &Overrides) -> Result<RunConfig, CliError> {
    let base = match &o.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let cfg = o.apply(base);
    cfg.validate()?;
    Ok(cfg)
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("NMCODE_THREADS") else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| CliError::Config(format!("NMCODE_THREADS = {v:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("NMCODE_THREADS: {e}")))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    threads()?;
    let cfg = configure(&cli.overrides)?;
    let Output { body, respected } = match &cli.command {
        Command::Code { .. } => commands::code_build(&cfg)?,
        Command::Amd { .. } => commands::amd_audit(&cfg)?,
        Command::Wt { .. } => commands::wt_audit(&cfg)?,
        Command::Lecss { .. } => commands::lecss_verify_cmd(&cfg)?,
        Command::Nm { .. } => commands::nm_audit(&cfg)?,
        Command::Smt { .. } => commands::smt_run(&cfg)?,
        Command::Bounds { query } => commands::bounds(&cfg, query)?,
    };
    match &cfg.out {
        Some(path) => fs::write(path, body).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(respected)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("nmcode: {e}");
            ExitCode::from(2)
        }
    }
}

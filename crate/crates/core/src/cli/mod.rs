//! Command-line front end: benchmark harness, private-audit scenario and a
//! single-party TCP runner.

mod audit;
mod bench;
mod party;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use audit::{run_audit, AuditMode, AuditReport, AuditScenario};
pub use bench::{run_bench, BenchConfig, BenchRecord, TransportKind, CSV_HEADER};
pub use party::{run_job_in_memory, run_party, Job, StatementBundle};

use crate::bulletproofs::{CommitMode, IpaMode};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_PROTOCOL_ABORT: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Environment variable holding the RNG seed.
pub const SEED_ENV: &str = "COLCP_SEED";
const DEFAULT_SEED: u64 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("statement is not provable: {0}")]
    Unsatisfiable(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error(transparent)]
    Protocol(#[from] Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Unsatisfiable(_) => EXIT_USAGE,
            CliError::VerifyFailed(_) => EXIT_VERIFY_FAILED,
            CliError::Protocol(e) if e.is_protocol_abort() => EXIT_PROTOCOL_ABORT,
            CliError::Protocol(Error::PreprocessingExhausted(_)) => EXIT_PROTOCOL_ABORT,
            CliError::Protocol(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_PROTOCOL_ABORT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// `--seed`, else `COLCP_SEED`, else a fixed default.
pub fn resolve_seed(flag: Option<u64>) -> CliResult<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "colcp",
    version,
    about = "Collaborative commit-and-prove Bulletproofs"
)]
pub struct Cli {
    /// RNG seed; overrides COLCP_SEED.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CommitArg {
    Cts,
    Stc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum IpaArg {
    Local,
    Distributed,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Composed,
    Monolithic,
    Both,
}

impl From<CommitArg> for CommitMode {
    fn from(a: CommitArg) -> Self {
        match a {
            CommitArg::Cts => CommitMode::Cts,
            CommitArg::Stc => CommitMode::Stc,
        }
    }
}

impl From<IpaArg> for IpaMode {
    fn from(a: IpaArg) -> Self {
        match a {
            IpaArg::Local => IpaMode::Local,
            IpaArg::Distributed => IpaMode::Distributed,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Benchmark sweep; writes one CSV row per configuration and phase.
    Bench {
        /// Multiplication gates, comma separated (e.g. 2,16,1024).
        #[arg(long, value_delimiter = ',', default_value = "2")]
        constraints: Vec<usize>,
        /// Party counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        parties: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "cts")]
        commit: Vec<CommitArg>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "local")]
        ipa: Vec<IpaArg>,
        #[arg(long, value_enum, default_value = "mem")]
        transport: TransportKind,
        /// Committed inputs per circuit; defaults to one per party.
        #[arg(long)]
        inputs: Option<usize>,
        /// Output CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Private audit: banks prove the net of their transactions reaches a threshold.
    Audit {
        #[arg(long, default_value_t = 2)]
        banks: usize,
        /// Total transactions, split evenly among banks.
        #[arg(long, default_value_t = 8)]
        tx: usize,
        /// Threshold T; defaults to the true net minus one.
        #[arg(long, allow_hyphen_values = true)]
        threshold: Option<i64>,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs one party of a job over TCP.
    Party {
        #[arg(long)]
        id: usize,
        /// Topology file: `<party_id> <host:port>` per line.
        #[arg(long)]
        config: PathBuf,
        /// Job script (`key = value` lines).
        #[arg(long)]
        role: PathBuf,
        /// Where to write the statement bundle.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 30_000)]
        timeout_ms: u64,
    },
}

/// Parses `args` (including the program name), runs and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("colcp: {e}");
            e.exit_code()
        }
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let seed = resolve_seed(cli.seed)?;
    match cli.command {
        Command::Bench {
            constraints,
            parties,
            commit,
            ipa,
            transport,
            inputs,
            out,
        } => {
            let mut csv = format!("{CSV_HEADER}\n");
            for &n in &constraints {
                for &p in &parties {
                    for &c in &commit {
                        for &i in &ipa {
                            let cfg = BenchConfig {
                                constraints: n,
                                parties: p,
                                inputs: inputs.unwrap_or(p.max(1)),
                                commit_mode: c.into(),
                                ipa_mode: i.into(),
                                transport,
                            };
                            for r in run_bench(&cfg, seed)? {
                                csv.push_str(&r.csv_row());
                                csv.push('\n');
                            }
                        }
                    }
                }
            }
            write_output(out.as_ref(), &csv)
        }
        Command::Audit {
            banks,
            tx,
            threshold,
            mode,
            out,
        } => {
            let scenario = AuditScenario::generate(banks, tx, threshold, seed)?;
            let modes: &[AuditMode] = match mode {
                ModeArg::Composed => &[AuditMode::Composed],
                ModeArg::Monolithic => &[AuditMode::Monolithic],
                ModeArg::Both => &[AuditMode::Composed, AuditMode::Monolithic],
            };
            let mut csv = format!("{CSV_HEADER}\n");
            for &m in modes {
                let report = run_audit(&scenario, m, seed)?;
                eprintln!("{}", report.summary());
                for r in &report.records {
                    csv.push_str(&r.csv_row());
                    csv.push('\n');
                }
            }
            write_output(out.as_ref(), &csv)
        }
        Command::Party {
            id,
            config,
            role,
            out,
            timeout_ms,
        } => {
            let bundle = run_party(
                id,
                &config,
                &role,
                seed,
                std::time::Duration::from_millis(timeout_ms),
            )?;
            if let Some(p) = out {
                std::fs::write(p, bundle.to_bytes())?;
            }
            Ok(())
        }
    }
}

//! Batch command surface over the laboratory crate.
//!
//! Subcommands emit their primary output on stdout (or to --out), human
//! commentary on stderr under --verbose, and a run manifest recording the
//! seed, the sanitized argument vector, and a digest of the primary output.
//! Re-running a manifest through `replay` must reproduce the digest exactly.
//!
//! Exit codes: 0 success, 1 invariant failure, 2 usage or parse error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use kakeya_core::Error as CoreError;

#[derive(Parser, Debug)]
#[command(name = "kakeya", version, about = "entropy-Kakeya laboratory")]
pub struct Cli {
    /// Seed for every random draw the command makes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: available parallelism). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Write the run manifest here (default: <out>.manifest.json next to
    /// --out, or kakeya-run.manifest.json in the working directory).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,

    /// Primary output format where applicable (default: json, except the
    /// bound table which is csv-first).
    #[arg(long, global = true)]
    pub format: Option<OutputFormat>,

    /// Human-readable tables on stderr.
    #[arg(long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Entropy report for a distribution file: total entropy, all pairwise
    /// conditionals, and a Shearer check over the all-(d-1)-subsets family.
    Entropy {
        /// Path to a JointDist JSON file.
        dist: PathBuf,
    },

    /// Search for a witness distribution certifying a lower bound.
    BetaSearch {
        /// Inline scalar direction set, e.g. "0,1" or "0,1/2,-3".
        #[arg(long, conflicts_with = "rset_file")]
        rset: Option<String>,

        /// Direction-set JSON file (any dimension).
        #[arg(long)]
        rset_file: Option<PathBuf>,

        /// Search configuration TOML; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,

        /// Which ratio to maximize.
        #[arg(long, default_value = "kakeya")]
        functional: String,
    },

    /// Combined-bound table for d = 1..=d_max at a fixed per-factor bound.
    BoundTable {
        /// Per-factor bound in (1, 2], or the word "alpha" for the cubic root.
        #[arg(long)]
        beta: String,

        #[arg(long, default_value_t = 8)]
        d_max: u32,
    },

    /// Run the seeded invariant suites.
    Verify {
        /// entropy | fourier | pipeline | all
        #[arg(long, default_value = "all")]
        suite: String,

        /// Largest prime the field-identity families run at.
        #[arg(long, default_value_t = 101)]
        p_cap: u64,
    },

    /// Re-run a manifest and compare output digests.
    Replay {
        manifest: PathBuf,
    },
}

/// Failure modes mapped to exit codes.
#[derive(Debug)]
pub enum CmdError {
    /// Bad input, bad flags, malformed files: exit 2.
    Usage(String),
    /// A checked invariant failed or a replay diverged: exit 1.
    Invariant(String),
}

impl CmdError {
    fn exit_code(&self) -> u8 {
        match self {
            CmdError::Usage(_) => 2,
            CmdError::Invariant(_) => 1,
        }
    }
}

impl From<CoreError> for CmdError {
    fn from(e: CoreError) -> CmdError {
        match e {
            CoreError::Internal(_)
            | CoreError::WitnessMismatch { .. }
            | CoreError::EmbedRetriesExhausted { .. } => CmdError::Invariant(e.to_string()),
            other => CmdError::Usage(other.to_string()),
        }
    }
}

/// A finished command: its primary output plus whether a checked invariant
/// failed (report printed, exit 1).
pub struct Execution {
    pub primary: String,
    pub invariant_failure: bool,
}

impl Execution {
    fn ok(primary: String) -> Execution {
        Execution {
            primary,
            invariant_failure: false,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();

    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot build worker pool: {e}");
            return ExitCode::from(2);
        }
    };

    let exec = match pool.install(|| commands::execute(&cli)) {
        Ok(exec) => exec,
        Err(e) => {
            match &e {
                CmdError::Invariant(msg) | CmdError::Usage(msg) => eprintln!("error: {msg}"),
            }
            return ExitCode::from(e.exit_code());
        }
    };

    if let Some(path) = &cli.out {
        if let Err(e) = std::fs::write(path, &exec.primary) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    } else {
        print!("{}", exec.primary);
    }

    if let Err(e) = manifest::write_manifest(&cli, &exec.primary, started.elapsed()) {
        eprintln!("warning: manifest not written: {e}");
    }

    if exec.invariant_failure {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

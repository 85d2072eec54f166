//! `blindpe`: prepare blinded materials, collect annotations, analyze them.

mod analyze;
mod ingest;
mod prepare;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use blindpe_core::interleaver::{BalanceScope, DEFAULT_SEGMENTS_PER_RATER};
use blindpe_core::EditThresholds;
use clap::{Parser, Subcommand, ValueEnum};

/// Failure classes, mapped to exit codes 1 and 2.
#[derive(Debug)]
pub enum Failure {
    /// Inputs were read but are not acceptable.
    Validation(anyhow::Error),
    /// The command line itself is wrong.
    Usage(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Validation(e.into())
    }
}

pub type Outcome = Result<(), Failure>;

#[derive(Parser)]
#[command(name = "blindpe", version, about = "Blinded HT/MT post-editing studies: prepare, collect, analyze")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Results table plus one figure-data file per comparison.
    Csv,
    /// Full-precision results.
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Split a corpus into per-rater blinded documents and a separate key.
    Prepare {
        /// Aligned corpus TSV with columns id, source, ht, mt.
        #[arg(long)]
        corpus: PathBuf,
        /// Rater ids in section order, comma separated or repeated.
        #[arg(long, value_delimiter = ',', required = true)]
        raters: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_SEGMENTS_PER_RATER)]
        segments_per_rater: usize,
        /// Seed for the assignment. Required so materials can be rebuilt.
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "per_section")]
        balance_scope: BalanceScope,
        /// Output directory. Rater documents go to `<out>/raters/`.
        #[arg(long)]
        out: PathBuf,
        /// Where to write the key [default: <out>/key.tsv].
        #[arg(long)]
        key: Option<PathBuf>,
        /// Leave wall-clock time out of the manifest.
        #[arg(long)]
        reproducible: bool,
    },
    /// Run the HTTP collection service over prepared documents.
    Serve {
        /// Directory of prepared rater documents (or a `prepare` output directory).
        #[arg(long)]
        prepared: PathBuf,
        #[arg(long, default_value = "journal.jsonl")]
        journal: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "BLINDPE_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "BLINDPE_DEADLINE_MINUTES", default_value_t = 90)]
        deadline_minutes: u32,
        /// Instruction text shown to raters. Defaults to the built-in text.
        #[arg(long, env = "BLINDPE_INSTRUCTIONS")]
        instructions: Option<String>,
        /// Bearer token for `GET /export`.
        #[arg(long, env = "BLINDPE_OPERATOR_TOKEN")]
        operator_token: String,
    },
    /// Normalize filled spreadsheets and service exports into JSON lines.
    Ingest {
        /// Filled prepared documents (.tsv) or service exports (.jsonl).
        #[arg(long, required = true, num_args = 1..)]
        annotations: Vec<PathBuf>,
        /// Output JSON-lines file.
        #[arg(long)]
        out: PathBuf,
        /// Key to check segment ids against.
        #[arg(long)]
        key: Option<PathBuf>,
        /// Rater id for sheets without a `# rater=` line.
        #[arg(long)]
        rater: Option<String>,
    },
    /// Unblind annotations and run every comparison.
    Analyze {
        /// Annotations per language pair, in the same order as `--key`.
        #[arg(long, required = true, num_args = 1..)]
        annotations: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        key: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// MED bin thresholds `edited,high_effort`.
        #[arg(long, default_value = "0,5")]
        thresholds: EditThresholds,
        #[arg(long, default_value_t = 0.95)]
        ci_level: f64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Output formats [default: both].
        #[arg(long, value_enum, num_args = 1..)]
        format: Vec<Format>,
        /// Leave wall-clock time out of every output.
        #[arg(long)]
        reproducible: bool,
    },
    /// Re-emit reports from a results.json written by `analyze`.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, num_args = 1..)]
        format: Vec<Format>,
    },
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Prepare {
            corpus,
            raters,
            segments_per_rater,
            seed,
            balance_scope,
            out,
            key,
            reproducible,
        } => prepare::run(prepare::Args {
            corpus,
            raters,
            segments_per_rater,
            seed,
            balance_scope,
            out,
            key,
            reproducible,
        }),
        Command::Serve {
            prepared,
            journal,
            host,
            port,
            deadline_minutes,
            instructions,
            operator_token,
        } => serve::run(serve::Args {
            prepared,
            journal,
            host,
            port,
            deadline_minutes,
            instructions,
            operator_token,
        }),
        Command::Ingest {
            annotations,
            out,
            key,
            rater,
        } => ingest::run(&annotations, &out, key.as_deref(), rater.as_deref()),
        Command::Analyze {
            annotations,
            key,
            alpha,
            thresholds,
            ci_level,
            out,
            format,
            reproducible,
        } => analyze::run(analyze::Args {
            annotations,
            keys: key,
            alpha,
            thresholds,
            ci_level,
            out,
            formats: format,
            reproducible,
        }),
        Command::Report { results, out, format } => analyze::report(&results, &out, &format),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

//! `xlmap` — pipeline driver for cross-lingual embedding mapping.
//!
//! Every stage is a subcommand reading a shared TOML configuration; flags
//! override individual settings. Exit codes: 0 success, 1 usage or
//! configuration error, 2 data-format error, 3 numeric failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xlmap::ErrorCategory;

mod commands;
mod config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(xlmap::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) => match e.category() {
                ErrorCategory::DataFormat => 2,
                ErrorCategory::Numeric => 3,
            },
        }
    }

    fn report(&self) {
        match self {
            CliError::Usage(msg) => eprintln!("error[Config]: {msg}"),
            CliError::Lib(e) => eprintln!("error[{}]: {e}", e.name()),
        }
    }
}

impl From<xlmap::Error> for CliError {
    fn from(e: xlmap::Error) -> Self {
        CliError::Lib(e)
    }
}

#[derive(Parser)]
#[command(
    name = "xlmap",
    version,
    about = "Learn and evaluate orthogonal cross-lingual embedding mappings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every config-driven subcommand.
#[derive(Args, Debug)]
struct Common {
    /// Pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic bilingual world for demos and tests.
    Gen(commands::GenArgs),
    /// Train the EM word aligner and export links and probabilities.
    Align {
        #[command(flatten)]
        common: Common,
        /// EM iterations.
        #[arg(long)]
        iterations: Option<usize>,
        /// Diagonal position prior strength (0 disables).
        #[arg(long)]
        lambda: Option<f64>,
        /// Enable the diagonal prior at its conventional strength, 4.0.
        #[arg(long, conflicts_with = "lambda")]
        diagonal: bool,
    },
    /// Build a mapping dictionary of the chosen kind.
    BuildDict {
        #[command(flatten)]
        common: Common,
        /// static | prob | contextual | sentence
        #[arg(long)]
        kind: Option<String>,
        /// Cap on extracted contextual pairs.
        #[arg(long)]
        cap: Option<usize>,
        /// static-arith | static-sif | token (sentence dictionaries).
        #[arg(long)]
        embeddings: Option<String>,
    },
    /// Learn an orthogonal map from a built dictionary.
    LearnMap {
        #[command(flatten)]
        common: Common,
        /// word | sentence | contextual (default: dictionary provenance).
        #[arg(long)]
        level: Option<String>,
        /// on | off | default
        #[arg(long)]
        normalize: Option<String>,
    },
    /// Transform the source vector table by a learned map.
    ApplyMap {
        #[command(flatten)]
        common: Common,
    },
    /// Embed a corpus into per-sentence vectors.
    EmbedSents {
        #[command(flatten)]
        common: Common,
        /// src | tgt
        #[arg(long, default_value = "src")]
        side: String,
        /// Corpus to embed (default: the configured training side).
        #[arg(long)]
        input: Option<PathBuf>,
        /// static-arith | static-sif | token
        #[arg(long)]
        embeddings: Option<String>,
        /// Subtract the first principal component after embedding.
        #[arg(long)]
        remove_pc: bool,
    },
    /// Evaluate a learned map.
    Eval {
        #[command(flatten)]
        common: Common,
        /// retrieval | wordtrans | similarity
        #[arg(long)]
        metric: String,
        /// Neighborhood sizes for wordtrans (overrides config).
        #[arg(long, value_delimiter = ',')]
        k: Option<Vec<usize>>,
        /// static | token | auto — test sentence embeddings for retrieval.
        #[arg(long)]
        embeddings: Option<String>,
    },
    /// Learning curve over doubling training splits.
    Curve {
        #[command(flatten)]
        common: Common,
        /// Comma-separated split sizes (default: 100,200,400,... capped).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Comma-separated systems: dict | word | ctx | sent.
        #[arg(long, value_delimiter = ',')]
        systems: Option<Vec<String>>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not errors.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            e.report();
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Align {
            common,
            iterations,
            lambda,
            diagonal,
        } => commands::align(&common, iterations, if diagonal { Some(4.0) } else { lambda }),
        Command::BuildDict {
            common,
            kind,
            cap,
            embeddings,
        } => commands::build_dict(&common, kind, cap, embeddings),
        Command::LearnMap {
            common,
            level,
            normalize,
        } => commands::learn_map(&common, level, normalize),
        Command::ApplyMap { common } => commands::apply_map(&common),
        Command::EmbedSents {
            common,
            side,
            input,
            embeddings,
            remove_pc,
        } => commands::embed_sents(&common, &side, input, embeddings, remove_pc),
        Command::Eval {
            common,
            metric,
            k,
            embeddings,
        } => commands::eval(&common, &metric, k, embeddings),
        Command::Curve {
            common,
            sizes,
            systems,
        } => commands::curve(&common, sizes, systems),
    }
}

//! The `semshift` command-line pipeline.
//!
//! Every subcommand is a pure function of its input files and flags:
//! identical inputs produce identical CSV bytes, and SVG output differs only
//! by an embedded timestamp that `--deterministic` removes. Failures print a
//! single-line error on stderr and exit nonzero; exit code 0 means every
//! requested output was fully written.

mod commands;
mod config;

pub use config::{resolve_formula, Formula, FormulaName, RunConfig, SEMSHIFT_DATA_ENV};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::change::ChangeMode;
use crate::corpus::Decade;

#[derive(Debug, Parser)]
#[command(
    name = "semshift",
    version,
    about = "Semantic change analysis over decade-sliced embedding spaces"
)]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,

    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. All of them may also be set in a
/// `key=value` file passed via `--config`; flags override the file, and the
/// file overrides defaults derived from the `SEMSHIFT_DATA` environment
/// variable.
#[derive(Debug, Args)]
pub struct SharedArgs {
    /// Plain key=value config file (keys match the long flag names).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory holding one embedding file per decade ({decade}.semb or
    /// {decade}.txt).
    #[arg(long, global = true, value_name = "DIR")]
    pub embeddings_dir: Option<PathBuf>,

    /// Majority POS tag table.
    #[arg(long, global = true, value_name = "FILE")]
    pub pos: Option<PathBuf>,

    /// Per-decade relative frequency table.
    #[arg(long, global = true, value_name = "FILE")]
    pub freq: Option<PathBuf>,

    /// Rated category lexicon CSV.
    #[arg(long, global = true, value_name = "FILE")]
    pub lexicon: Option<PathBuf>,

    /// Directory of covariate resources (hypernym_edges.tsv,
    /// token_senses.tsv, sense_dates.tsv, aoa.csv).
    #[arg(long, global = true, value_name = "DIR")]
    pub covariates: Option<PathBuf>,

    /// Earlier decade (default 1890).
    #[arg(long, global = true, value_name = "DECADE")]
    pub t1: Option<Decade>,

    /// Later decade (default 1990).
    #[arg(long, global = true, value_name = "DECADE")]
    pub t2: Option<Decade>,

    /// Neighborhood size; defaults to 100 in lexicon mode, 25 in category
    /// mode.
    #[arg(long, global = true, value_name = "K")]
    pub k: Option<usize>,

    /// Neighbor pool: the whole POS-matched lexicon or the word's own
    /// category.
    #[arg(long, global = true, value_name = "lexicon|category")]
    pub mode: Option<ChangeMode>,

    /// Regression formula preset.
    #[arg(long, global = true, value_name = "eq3|eq4|c2|c3|custom")]
    pub formula: Option<FormulaName>,

    /// Output directory (default ./out).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Omit timestamps so reruns are byte-identical.
    #[arg(long, global = true)]
    pub deterministic: bool,

    /// POS tag every analyzed token must carry; "any" lifts the filter
    /// (default NOUN).
    #[arg(long, global = true, value_name = "TAG")]
    pub require_pos: Option<String>,

    /// Restrict category-level commands to one lexicon category.
    #[arg(long, global = true, value_name = "NAME")]
    pub category: Option<String>,

    /// Seed recorded in the manifest; reserved for sampled extensions.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Override guard rails such as the c3 decade-pair check.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate all inputs, intersect the lexicon, and persist normalized
    /// artifacts (binary embeddings, normalized lexicon, exclusion report).
    Ingest,

    /// Semantic change rate per lexicon token between --t1 and --t2.
    Rate {
        /// Also write the ranked neighbor lists behind each rate.
        #[arg(long)]
        dump_neighbors: bool,
    },

    /// Prototypicality scores per category member, with a reconstruction
    /// correlation against the empirical ratings.
    Proto {
        /// Decades to score at (default: --t1).
        #[arg(long, value_delimiter = ',', value_name = "DECADES")]
        decades: Vec<Decade>,

        /// Refit the prototype without the scored member.
        #[arg(long)]
        leave_one_out: bool,
    },

    /// Fit the configured regression formula and report coefficients and
    /// influence diagnostics.
    Regress {
        /// Predictor columns for --formula custom, e.g.
        /// "proto_est,log10(freq),valence".
        #[arg(long, value_delimiter = ',', value_name = "COLS")]
        predictors: Vec<String>,
    },

    /// Recompute rates across several neighborhood sizes and correlate the
    /// resulting columns.
    Sweep {
        /// Neighborhood sizes (default 20,40,60,80,100).
        #[arg(long, value_delimiter = ',', value_name = "KS")]
        ks: Vec<usize>,
    },

    /// Influence diagnostics (residual, leverage, Cook's distance) for the
    /// configured regression.
    Influence {
        /// Predictor columns for --formula custom.
        #[arg(long, value_delimiter = ',', value_name = "COLS")]
        predictors: Vec<String>,
    },

    /// Project tokens across decades onto the first two principal
    /// components.
    Project {
        /// Tokens to project.
        #[arg(long, required = true, value_delimiter = ',', value_name = "TOKENS")]
        tokens: Vec<String>,

        /// Decades to include (default: --t1,--t2).
        #[arg(long, value_delimiter = ',', value_name = "DECADES")]
        decades: Vec<Decade>,
    },

    /// Kernel density curves of change rates per category, with rug marks
    /// sized by prototypicality.
    Density {
        /// Categories to include (default: every category in the lexicon).
        #[arg(long, value_delimiter = ',', value_name = "NAMES")]
        groups: Vec<String>,

        /// Explicit kernel bandwidth; default is Scott's rule.
        #[arg(long, value_name = "H")]
        bandwidth: Option<f64>,
    },

    /// Run the full pipeline into a self-contained directory with CSVs,
    /// SVGs, a text summary, and a checksum manifest.
    Report {
        /// Also write the ranked neighbor lists behind each rate.
        #[arg(long)]
        dump_neighbors: bool,

        /// Predictor columns for --formula custom.
        #[arg(long, value_delimiter = ',', value_name = "COLS")]
        predictors: Vec<String>,

        /// Check the manifest in --out against the current inputs instead
        /// of writing anything.
        #[arg(long)]
        verify: bool,
    },
}

/// Parse arguments, run the selected command, and translate failures into a
/// single-line stderr message with a nonzero exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = (|| {
        let config = RunConfig::resolve(&cli.shared)?;
        match cli.command {
            Command::Ingest => commands::ingest(&config),
            Command::Rate { dump_neighbors } => commands::rate(&config, dump_neighbors),
            Command::Proto {
                decades,
                leave_one_out,
            } => commands::proto(&config, &decades, leave_one_out),
            Command::Regress { predictors } => commands::regress(&config, &predictors),
            Command::Sweep { ks } => commands::sweep(&config, &ks),
            Command::Influence { predictors } => commands::influence(&config, &predictors),
            Command::Project { tokens, decades } => {
                commands::project(&config, &tokens, &decades)
            }
            Command::Density { groups, bandwidth } => {
                commands::density(&config, &groups, bandwidth)
            }
            Command::Report {
                dump_neighbors,
                predictors,
                verify,
            } => {
                if verify {
                    commands::verify_report(&config)
                } else {
                    commands::report(&config, dump_neighbors, &predictors)
                }
            }
        }
    })();
    match result {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {}", err.single_line());
            1
        }
    }
}

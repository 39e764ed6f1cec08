use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use intervene_core::{Direction, ErrorKind};

/// `NAME=STATE`, as used by every assignment flag.
pub fn parse_pair(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
            Ok((k.trim().to_string(), v.trim().to_string()))
        }
        _ => Err(format!("expected NAME=STATE, got `{s}`")),
    }
}

/// Comma-separated `NAME=STATE` list; empty means no evidence.
pub fn parse_row(s: &str) -> Result<Vec<(String, String)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(parse_pair)
        .collect()
}

#[derive(Debug, Parser)]
#[command(
    name = "intervene",
    version,
    about = "Causal analysis of discrete Bayesian networks"
)]
pub struct Cli {
    /// Machine-readable JSON on stdout instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Render probabilities as percentages with one decimal.
    #[arg(long, global = true)]
    pub percent: bool,
    /// Do not write the run report to stderr.
    #[arg(long, short, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Conditioning {
    /// Observed state, NAME=STATE (repeatable).
    #[arg(long = "evidence", short = 'e', value_name = "NAME=STATE", value_parser = parse_pair)]
    pub evidence: Vec<(String, String)>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file; prints one line per violation.
    Validate { model: PathBuf },
    /// Posterior of a target state under evidence and optional interventions.
    Query {
        model: PathBuf,
        #[arg(long, short, value_name = "NAME=STATE", value_parser = parse_pair)]
        target: (String, String),
        #[command(flatten)]
        conditioning: Conditioning,
        /// Intervention, NAME=STATE (repeatable).
        #[arg(long = "do", short = 'd', value_name = "NAME=STATE", value_parser = parse_pair)]
        intervention: Vec<(String, String)>,
        /// Risk table JSON; defaults to the model manifest's, then the built-in table.
        #[arg(long, value_name = "FILE")]
        risk_table: Option<PathBuf>,
    },
    /// Like `query`, with at least one intervention.
    Intervene {
        model: PathBuf,
        #[arg(long, short, value_name = "NAME=STATE", value_parser = parse_pair)]
        target: (String, String),
        #[command(flatten)]
        conditioning: Conditioning,
        #[arg(long = "do", short = 'd', value_name = "NAME=STATE", value_parser = parse_pair, required = true)]
        intervention: Vec<(String, String)>,
        #[arg(long, value_name = "FILE")]
        risk_table: Option<PathBuf>,
    },
    /// Exact bound on a target probability over an intervention space.
    Bounds {
        model: PathBuf,
        space: PathBuf,
        #[arg(long, short, value_name = "NAME=STATE", value_parser = parse_pair)]
        target: (String, String),
        #[command(flatten)]
        conditioning: Conditioning,
        #[arg(long, default_value = "max")]
        direction: Direction,
    },
    /// Classify one feature instantiation.
    Classify {
        model: PathBuf,
        config: PathBuf,
        /// Feature state, NAME=STATE (one per feature).
        #[arg(long = "feature", short = 'f', value_name = "NAME=STATE", value_parser = parse_pair)]
        features: Vec<(String, String)>,
        /// Take the label from a compiled diagram instead of the posterior.
        #[arg(long, value_name = "FILE")]
        diagram: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        risk_table: Option<PathBuf>,
    },
    /// Compile a classifier to an ordered decision diagram.
    Compile {
        model: PathBuf,
        config: PathBuf,
        /// Search for a small variable order instead of the config's.
        #[arg(long, conflicts_with = "order")]
        greedy_order: bool,
        /// Explicit variable order, comma-separated.
        #[arg(long, value_delimiter = ',', value_name = "NAMES")]
        order: Option<Vec<String>>,
        /// Write the diagram here instead of stdout.
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Bound a classifier's misclassification probability over an intervention space.
    ErrorBound {
        model: PathBuf,
        config: PathBuf,
        space: PathBuf,
        #[arg(long, default_value = "false-negative")]
        kind: ErrorKind,
        #[arg(long, default_value = "max")]
        direction: Direction,
        /// Use a compiled diagram instead of compiling the config.
        #[arg(long, value_name = "FILE")]
        diagram: Option<PathBuf>,
    },
    /// Posterior table over several evidence sets, as TSV.
    Whatif {
        model: PathBuf,
        /// JSON array of evidence objects.
        sets: Option<PathBuf>,
        /// Target column, NAME=STATE (repeatable).
        #[arg(long, short, value_name = "NAME=STATE", value_parser = parse_pair, required = true)]
        target: Vec<(String, String)>,
        /// Extra row, `A=a,B=b`; an empty string is the no-evidence row.
        #[arg(long, value_name = "ROW", value_parser = parse_row)]
        row: Vec<Vec<(String, String)>>,
    },
    /// Rank candidate variables by their effect on a target probability.
    Sensitivity {
        model: PathBuf,
        #[arg(long, short, value_name = "NAME=STATE", value_parser = parse_pair)]
        target: (String, String),
        #[command(flatten)]
        conditioning: Conditioning,
        /// Candidates, comma-separated; defaults to every other unobserved variable.
        #[arg(long, value_delimiter = ',', value_name = "NAMES")]
        candidates: Option<Vec<String>>,
        /// Spread above which a candidate is suggested as a feature.
        #[arg(long, default_value_t = intervene_core::sensitivity::DEFAULT_FEATURE_CUTOFF)]
        cutoff: f64,
    },
    /// Serve the HTTP API over a model directory.
    Serve {
        /// Directory of `<id>.json` models and `<id>.manifest.json` sidecars.
        #[arg(long, default_value = "data/models")]
        models: PathBuf,
        #[arg(long, default_value_t = intervene_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Static files served for unmatched paths, e.g. a built console.
        #[arg(long = "static", value_name = "DIR")]
        static_dir: Option<PathBuf>,
        /// Running bound jobs allowed per model.
        #[arg(long, default_value_t = 1)]
        max_jobs: usize,
        /// Allowed CORS origin; any origin if omitted.
        #[arg(long, value_name = "ORIGIN")]
        cors_origin: Option<String>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Query { .. } => "query",
            Command::Intervene { .. } => "intervene",
            Command::Bounds { .. } => "bounds",
            Command::Classify { .. } => "classify",
            Command::Compile { .. } => "compile",
            Command::ErrorBound { .. } => "error-bound",
            Command::Whatif { .. } => "whatif",
            Command::Sensitivity { .. } => "sensitivity",
            Command::Serve { .. } => "serve",
        }
    }
}

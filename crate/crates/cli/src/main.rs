//! `sodd`: command-line front end for parsing, scanning, clone matching and
//! the snippet-to-contract study.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 an input failed to
//! parse, 3 a search budget was exhausted. Machine output goes to stdout,
//! diagnostics to stderr.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sodd::clone::CloneParams;
use sodd::detectors::detector_ids;
use sodd::graphquery::Budget;
use sodd::pipeline::KeywordList;

#[derive(Parser, Debug)]
#[command(name = "sodd", version, about = "Vulnerability and clone analysis for Solidity snippets")]
struct Cli {
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Settings {
    /// N-gram length of the clone prefilter index.
    #[arg(long, global = true, env = "SODD_NGRAM", default_value_t = 3)]
    ngram: usize,
    /// Minimum fraction of the query's n-grams a candidate must share.
    #[arg(long, global = true, env = "SODD_ETA", default_value_t = 0.5)]
    eta: f64,
    /// Minimum similarity score (0-100) for a reported clone; defaults to 70,
    /// or 90 for `study`.
    #[arg(long, global = true, env = "SODD_EPSILON")]
    epsilon: Option<f64>,
    /// Per-pattern time limit in seconds.
    #[arg(long, global = true, env = "SODD_TIMEOUT", default_value_t = 1800.0)]
    timeout: f64,
    /// Comma-separated hop caps tried after a timeout; empty disables the ladder.
    #[arg(long, global = true, env = "SODD_LADDER", default_value = "64,32,16,8")]
    ladder: String,
    /// Comma-separated detector ids to run; all when omitted.
    #[arg(long, global = true, env = "SODD_DETECTORS", value_delimiter = ',')]
    detectors: Option<Vec<String>>,
    /// Keyword list used to recognise Solidity snippets; the bundled list when omitted.
    #[arg(long, global = true, env = "SODD_KEYWORDS")]
    keywords: Option<PathBuf>,
    #[arg(long, global = true, env = "SODD_FORMAT", value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; all cores when omitted.
    #[arg(long, global = true, env = "SODD_JOBS")]
    jobs: Option<usize>,
    /// Seed for permutation p-values in `study` and `stats`; none are computed without it.
    #[arg(long, global = true, env = "SODD_SEED")]
    seed: Option<u64>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Dot,
    Sarif,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dump the syntax tree of a snippet.
    Parse { file: PathBuf },
    /// Export the code property graph of a snippet.
    Cpg { file: PathBuf },
    /// Run the detectors over files or directories of `.sol` files.
    Scan {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Emit per-category counts instead of individual findings.
        #[arg(long)]
        summary: bool,
    },
    /// Write one `id<TAB>fingerprint` line per source file.
    Fingerprint {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Build a persistent n-gram index from a fingerprint file.
    Index { fingerprints: PathBuf, index: PathBuf },
    /// Match a snippet against a persisted index.
    Match {
        snippet: PathBuf,
        index: PathBuf,
        /// Treat the snippet file as a fingerprint file instead of source code.
        #[arg(long)]
        fingerprinted: bool,
    },
    /// Run the full study over JSON-lines snippet and contract corpora.
    Study {
        snippets: PathBuf,
        contracts: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Spearman correlation of a two-column pairs file.
    Stats { pairs: PathBuf },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 1, error: error.into() }
    }

    pub fn parse(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: error.into() }
    }

    pub fn budget(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: 3, error: error.into() }
    }
}

/// Settings after validation.
pub struct Config {
    pub clone: CloneParams,
    pub budget: Budget,
    pub detectors: Option<Vec<String>>,
    pub keywords: KeywordList,
    pub format: Format,
    pub jobs: Option<usize>,
    pub seed: Option<u64>,
}

impl Settings {
    fn validate(&self, study: bool) -> Result<Config, Failure> {
        let base = if study { CloneParams::study() } else { CloneParams::default() };
        let clone = CloneParams { ngram: self.ngram, eta: self.eta, epsilon: self.epsilon.unwrap_or(base.epsilon) };
        clone.validate().map_err(Failure::usage)?;
        if !(self.timeout.is_finite() && self.timeout > 0.0) {
            return Err(Failure::usage(anyhow::anyhow!("--timeout must be a positive number of seconds")));
        }
        let ladder = self
            .ladder
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u32>().map_err(|_| Failure::usage(anyhow::anyhow!("--ladder: `{s}` is not a hop count"))))
            .collect::<Result<Vec<u32>, _>>()?;
        let budget = Budget::default().with_time_limit(Duration::from_secs_f64(self.timeout)).with_ladder(ladder);
        if let Some(ids) = &self.detectors {
            let known = detector_ids();
            if let Some(bad) = ids.iter().find(|id| !known.contains(&id.as_str())) {
                return Err(Failure::usage(anyhow::anyhow!("unknown detector `{bad}`; known: {}", known.join(", "))));
            }
        }
        let keywords = match &self.keywords {
            Some(p) => KeywordList::load(p).map_err(Failure::usage)?,
            None => KeywordList::bundled(),
        };
        if self.jobs == Some(0) {
            return Err(Failure::usage(anyhow::anyhow!("--jobs must be at least 1")));
        }
        Ok(Config {
            clone,
            budget,
            detectors: self.detectors.clone(),
            keywords,
            format: self.format,
            jobs: self.jobs,
            seed: self.seed,
        })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = cli.settings.validate(matches!(cli.command, Command::Study { .. }))?;
    match cli.command {
        Command::Parse { file } => commands::parse(&file, &config),
        Command::Cpg { file } => commands::cpg(&file, &config),
        Command::Scan { paths, summary } => commands::scan(&paths, summary, &config),
        Command::Fingerprint { paths } => commands::fingerprint(&paths, &config),
        Command::Index { fingerprints, index } => commands::index(&fingerprints, &index, &config),
        Command::Match { snippet, index, fingerprinted } => commands::match_snippet(&snippet, &index, fingerprinted, &config),
        Command::Study { snippets, contracts, report } => commands::study(&snippets, &contracts, report.as_deref(), &config),
        Command::Stats { pairs } => commands::stats(&pairs, &config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("sodd: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

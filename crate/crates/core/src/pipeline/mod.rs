//! The snippet-to-contract study: ingestion of JSON-lines corpora, keyword
//! filtering, comment-insensitive deduplication, vulnerability detection on
//! snippets, clone mapping with temporal classes, validation on the matched
//! contracts, and the summary report.

mod clones;
mod dedup;
mod keywords;
mod records;
mod stats;
mod study;
mod validate;

pub use clones::{classify, link_in, map_clones, CloneLink, DatedFingerprint, SnippetClass, TemporalClass};
pub use dedup::{dedup, strip_comments, Deduped};
pub use keywords::{filter_solidity, KeywordList};
pub use records::{ingest, ingest_reader, is_address, ContractRecord, Corpus, Dated, Diagnostic, SnippetRecord};
pub use stats::{average_ranks, spearman, CorrelationResult, Permutation};
pub use study::{render_text, run_study, CorrelationRow, Failures, Funnel, StudyConfig, StudyReport};
pub use validate::{validate, ContractVerdict, ValidationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error("i/o: {0}")]
    Io(String),
    #[error("keyword file: {0}")]
    MissingKeywordFile(String),
    #[error("need at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("rank correlation undefined: one variable is constant")]
    DegenerateSample,
    #[error(transparent)]
    Clone(#[from] crate::clone::CloneError),
}

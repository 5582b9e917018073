//! Snippet-tolerant Solidity analysis: parsing, code property graphs, graph
//! queries, vulnerability detectors, clone detection and the study pipeline.

pub mod clone;
pub mod cpg;
pub mod detectors;
pub mod graphquery;
pub mod parser;
pub mod pipeline;

/// Errors crossing module boundaries.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] parser::ParseError),
    #[error(transparent)]
    Cpg(#[from] cpg::CpgError),
}

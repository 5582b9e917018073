//! Token-based clone detection.
//!
//! Source is normalized so that layout, comments and identifier names no
//! longer matter, split into segments (contract headers, functions, runs of
//! bare statements), and hashed token by token into a [`Fingerprint`]. Two
//! fingerprints are compared segment-wise with [`epsilon`]; an [`NgramIndex`]
//! keeps the number of such comparisons small.

mod fingerprint;
mod index;
mod normalize;
mod score;

use serde::{Deserialize, Serialize};

pub use fingerprint::{
    fingerprint, fingerprint_source, read_fingerprints, token_char, token_hash, tokenize_for_fingerprint,
    write_fingerprints, Fingerprint, Segment, SegmentKind, ALPHABET, CONTRACT_SEPARATOR, FUNCTION_SEPARATOR,
};
pub use index::{ngrams, Candidate, NgramIndex};
pub use normalize::{is_elementary_type, normalize, normalize_source};
pub use score::{delta, epsilon, epsilon_symmetric};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CloneError {
    #[error("empty input")]
    EmptyInput,
    #[error("fingerprint has no segments")]
    EmptyFingerprint,
    #[error("invalid fingerprint: {0}")]
    InvalidFingerprint(String),
    #[error("duplicate fingerprint id `{0}`")]
    DuplicateId(String),
    #[error("no fingerprint with id `{0}`")]
    MissingId(String),
    #[error("index storage: {0}")]
    Storage(String),
    #[error("invalid clone parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Parse(#[from] crate::parser::ParseError),
}

/// Prefilter and acceptance thresholds. `eta` is a fraction, `epsilon` a
/// score on the 0–100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CloneParams {
    pub ngram: usize,
    pub eta: f64,
    pub epsilon: f64,
}

impl Default for CloneParams {
    fn default() -> Self {
        CloneParams { ngram: 3, eta: 0.5, epsilon: 70.0 }
    }
}

impl CloneParams {
    /// Thresholds for high-confidence study matching.
    pub fn study() -> Self {
        CloneParams { epsilon: 90.0, ..CloneParams::default() }
    }

    pub fn validate(&self) -> Result<(), CloneError> {
        if self.ngram == 0 {
            return Err(CloneError::InvalidParams("n-gram size must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(CloneError::InvalidParams(format!("eta {} outside [0, 1]", self.eta)));
        }
        if !(0.0..=100.0).contains(&self.epsilon) {
            return Err(CloneError::InvalidParams(format!("epsilon {} outside [0, 100]", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub candidate_id: String,
    pub epsilon: f64,
    pub eta_overlap: f64,
}

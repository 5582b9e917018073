//! JSON-lines corpora.

use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnippetRecord {
    pub id: String,
    pub site: String,
    pub post_id: String,
    pub created_at: DateTime<Utc>,
    pub views: u64,
    pub code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContractRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<String>,
    pub deployed_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compiler_version: Option<String>,
    pub code: String,
}

/// Record fields the pipeline treats uniformly.
pub trait Dated {
    fn id(&self) -> &str;
    fn timestamp(&self) -> DateTime<Utc>;
    fn code(&self) -> &str;
    fn check(&self) -> Result<(), String> {
        Ok(())
    }
}

impl Dated for SnippetRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn timestamp(&self) -> DateTime<Utc> {
        self.created_at
    }
    fn code(&self) -> &str {
        &self.code
    }
}

impl Dated for ContractRecord {
    fn id(&self) -> &str {
        &self.id
    }
    fn timestamp(&self) -> DateTime<Utc> {
        self.deployed_at
    }
    fn code(&self) -> &str {
        &self.code
    }
    fn check(&self) -> Result<(), String> {
        match &self.address {
            Some(a) if !is_address(a) => Err(format!("`{a}` is not a 0x-prefixed 40-digit hex address")),
            _ => Ok(()),
        }
    }
}

pub fn is_address(s: &str) -> bool {
    s.strip_prefix("0x")
        .is_some_and(|h| h.len() == 40 && h.bytes().all(|b| b.is_ascii_hexdigit()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus<T> {
    pub records: Vec<T>,
    /// One entry per skipped line.
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Default for Corpus<T> {
    fn default() -> Self {
        Corpus { records: Vec::new(), diagnostics: Vec::new() }
    }
}

impl<T> Corpus<T> {
    pub fn skipped(&self) -> usize {
        self.diagnostics.len()
    }
}

/// Parses one record per non-blank line; malformed lines and duplicate ids
/// are skipped with a diagnostic.
pub fn ingest_reader<T: DeserializeOwned + Dated>(reader: impl BufRead) -> Result<Corpus<T>, PipelineError> {
    let mut corpus = Corpus::default();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| PipelineError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<T>(&line)
            .map_err(|e| e.to_string())
            .and_then(|r| r.check().map(|()| r))
            .and_then(|r| if seen.insert(r.id().to_string()) { Ok(r) } else { Err(format!("duplicate id `{}`", r.id())) });
        match parsed {
            Ok(r) => corpus.records.push(r),
            Err(message) => corpus.diagnostics.push(Diagnostic { line: i + 1, message }),
        }
    }
    Ok(corpus)
}

pub fn ingest<T: DeserializeOwned + Dated>(path: &Path) -> Result<Corpus<T>, PipelineError> {
    let file = std::fs::File::open(path).map_err(|e| PipelineError::Io(format!("{}: {e}", path.display())))?;
    ingest_reader(std::io::BufReader::new(file))
}

//! Keyword filter separating Solidity snippets from other languages.

use std::collections::BTreeSet;
use std::path::Path;

use super::{PipelineError, SnippetRecord};

const BUNDLED: &str = include_str!("../../data/solidity-keywords.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordList {
    words: BTreeSet<String>,
}

impl KeywordList {
    /// The shipped list: Solidity words that are not JavaScript keywords.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|w| !w.is_empty())
            .map(str::to_string)
            .collect();
        KeywordList { words }
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        std::fs::read_to_string(path)
            .map(|t| Self::parse(&t))
            .map_err(|e| PipelineError::MissingKeywordFile(format!("{}: {e}", path.display())))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    /// True when some identifier-like word of `code` is on the list.
    pub fn matches(&self, code: &str) -> bool {
        code.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '$'))
            .any(|w| self.words.contains(w))
    }
}

pub fn filter_solidity(snippets: Vec<SnippetRecord>, keywords: &KeywordList) -> Vec<SnippetRecord> {
    snippets.into_iter().filter(|s| keywords.matches(&s.code)).collect()
}

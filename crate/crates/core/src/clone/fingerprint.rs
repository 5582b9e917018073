//! Segmenting normalized code and hashing its tokens into fingerprints.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::CloneError;
use crate::parser::{tokenize_str, TokenKind};

pub const ALPHABET: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
pub const CONTRACT_SEPARATOR: char = ':';
pub const FUNCTION_SEPARATOR: char = '.';

/// Symbols that carry no token of their own.
const SILENT: &[&str] = &["(", ")", "{", "}", "[", "]", ";", ","];

const FUNCTION_KEYWORDS: &[&str] = &["function", "modifier", "constructor", "fallback", "receive"];
const CONTRACT_KEYWORDS: &[&str] = &["contract", "library", "interface"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    /// `contract c is ...` up to the opening brace.
    Header,
    Function,
    /// A run of file-level statements.
    Statements,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub tokens: Vec<String>,
}

/// Splits normalized code into a header per contract, one segment per
/// function-like member and one per run of file-level statements. State
/// variables, events, structs, enums, pragmas and imports contribute nothing.
pub fn tokenize_for_fingerprint(normalized: &str) -> Vec<Segment> {
    let toks: Vec<(String, bool)> = tokenize_str(normalized)
        .tokens
        .into_iter()
        .filter(|t| t.kind != TokenKind::Newline)
        .map(|t| {
            let symbol = t.kind == TokenKind::Symbol;
            (t.text, symbol)
        })
        .collect();
    let mut seg = Segmenter { toks: &toks, pos: 0, out: Vec::new() };
    seg.file_level();
    seg.out.retain(|s| !s.tokens.is_empty());
    seg.out
}

struct Segmenter<'a> {
    toks: &'a [(String, bool)],
    pos: usize,
    out: Vec<Segment>,
}

impl Segmenter<'_> {
    fn at(&self, words: &[&str]) -> bool {
        self.toks.get(self.pos).is_some_and(|(t, sym)| !sym && words.contains(&t.as_str()))
    }

    fn text(&self, i: usize) -> &str {
        &self.toks[i].0
    }

    fn file_level(&mut self) {
        let mut statements: Option<usize> = None;
        while self.pos < self.toks.len() {
            let contract = self.at(CONTRACT_KEYWORDS)
                || (self.at(&["abstract"]) && self.toks.get(self.pos + 1).is_some_and(|(t, _)| t == "contract"));
            if contract {
                statements = None;
                self.contract();
            } else if self.at(FUNCTION_KEYWORDS) {
                statements = None;
                let r = self.item();
                self.push(SegmentKind::Function, r);
            } else if self.at(&["pragma", "import"]) {
                self.skip_to_semicolon();
            } else {
                let r = self.item();
                match statements {
                    Some(k) => {
                        let toks = self.collect(r);
                        self.out[k].tokens.extend(toks);
                    }
                    None => {
                        statements = Some(self.out.len());
                        self.push(SegmentKind::Statements, r);
                    }
                }
            }
        }
    }

    fn contract(&mut self) {
        let start = self.pos;
        while self.pos < self.toks.len() && self.text(self.pos) != "{" {
            self.pos += 1;
        }
        self.push(SegmentKind::Header, start..self.pos);
        if self.pos >= self.toks.len() {
            return;
        }
        self.pos += 1;
        while self.pos < self.toks.len() && self.text(self.pos) != "}" {
            if self.at(FUNCTION_KEYWORDS) {
                let r = self.item();
                self.push(SegmentKind::Function, r);
            } else {
                self.item();
            }
        }
        self.pos += 1;
    }

    /// Consumes one member or statement: up to a `;` at its own level, or
    /// through the first balanced brace block.
    fn item(&mut self) -> std::ops::Range<usize> {
        let start = self.pos;
        let mut depth = 0usize;
        while self.pos < self.toks.len() {
            let t = self.text(self.pos);
            match t {
                "(" | "[" => depth += 1,
                ")" | "]" => depth = depth.saturating_sub(1),
                ";" if depth == 0 => {
                    self.pos += 1;
                    break;
                }
                "}" if depth == 0 && self.pos == start => {
                    // stray closer
                    self.pos += 1;
                    break;
                }
                "}" if depth == 0 => break,
                "{" if depth == 0 => {
                    self.skip_block();
                    if self.else_follows() {
                        continue;
                    }
                    break;
                }
                _ => {}
            }
            self.pos += 1;
        }
        start..self.pos
    }

    fn else_follows(&self) -> bool {
        self.toks.get(self.pos).is_some_and(|(t, _)| t == "else" || t == "while")
    }

    fn skip_block(&mut self) {
        let mut depth = 0usize;
        while self.pos < self.toks.len() {
            match self.text(self.pos) {
                "{" => depth += 1,
                "}" => {
                    depth -= 1;
                    if depth == 0 {
                        self.pos += 1;
                        return;
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
    }

    fn skip_to_semicolon(&mut self) {
        while self.pos < self.toks.len() {
            self.pos += 1;
            if self.text(self.pos - 1) == ";" {
                return;
            }
        }
    }

    fn collect(&self, r: std::ops::Range<usize>) -> Vec<String> {
        self.toks[r]
            .iter()
            .filter(|(t, sym)| !(*sym && SILENT.contains(&t.as_str())))
            .map(|(t, _)| t.clone())
            .collect()
    }

    fn push(&mut self, kind: SegmentKind, r: std::ops::Range<usize>) {
        let tokens = self.collect(r);
        self.out.push(Segment { kind, tokens });
    }
}

/// 32-bit polynomial hash: `h = h·257 + byte (mod 2^32)` from 5381.
pub fn token_hash(token: &str) -> u32 {
    token.bytes().fold(5381u32, |h, b| h.wrapping_mul(257).wrapping_add(u32::from(b)))
}

pub fn token_char(token: &str) -> char {
    char::from(ALPHABET[(token_hash(token) % 64) as usize])
}

/// A base-64 string with one character per token; `:` opens a contract
/// header and `.` opens every other segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fingerprint {
    pub source_id: String,
    pub text: String,
}

impl Fingerprint {
    /// Validates `text` as fingerprint syntax.
    pub fn new(source_id: impl Into<String>, text: impl Into<String>) -> Result<Self, CloneError> {
        let text = text.into();
        if let Some(bad) = text.chars().find(|&c| !is_fingerprint_char(c)) {
            return Err(CloneError::InvalidFingerprint(format!("character {bad:?} outside the alphabet")));
        }
        let fp = Fingerprint { source_id: source_id.into(), text };
        if fp.subfingerprints().is_empty() {
            return Err(CloneError::EmptyFingerprint);
        }
        Ok(fp)
    }

    /// The non-empty runs between separators, in order.
    pub fn subfingerprints(&self) -> Vec<&str> {
        self.text
            .split([CONTRACT_SEPARATOR, FUNCTION_SEPARATOR])
            .filter(|s| !s.is_empty())
            .collect()
    }

    /// Number of hashed tokens.
    pub fn token_count(&self) -> usize {
        self.text.chars().filter(|&c| c != CONTRACT_SEPARATOR && c != FUNCTION_SEPARATOR).count()
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.source_id, self.text)
    }
}

fn is_fingerprint_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '+' | '/' | CONTRACT_SEPARATOR | FUNCTION_SEPARATOR)
}

pub fn fingerprint(source_id: impl Into<String>, segments: &[Segment]) -> Result<Fingerprint, CloneError> {
    let mut text = String::new();
    for s in segments.iter().filter(|s| !s.tokens.is_empty()) {
        text.push(if s.kind == SegmentKind::Header { CONTRACT_SEPARATOR } else { FUNCTION_SEPARATOR });
        text.extend(s.tokens.iter().map(|t| token_char(t)));
    }
    if text.is_empty() {
        return Err(CloneError::EmptyFingerprint);
    }
    Ok(Fingerprint { source_id: source_id.into(), text })
}

/// Parse, normalize, segment and hash.
pub fn fingerprint_source(source_id: impl Into<String>, source: &str) -> Result<Fingerprint, CloneError> {
    let normalized = super::normalize_source(source)?;
    fingerprint(source_id, &tokenize_for_fingerprint(&normalized))
}

/// Reads `id<TAB>text` lines; blank lines are skipped.
pub fn read_fingerprints(reader: impl BufRead) -> Result<Vec<Fingerprint>, CloneError> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| CloneError::Storage(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| CloneError::InvalidFingerprint(format!("line {}: expected `id<TAB>fingerprint`", n + 1)))?;
        out.push(Fingerprint::new(id, text.trim_end())?);
    }
    Ok(out)
}

pub fn write_fingerprints<'a>(
    mut writer: impl Write,
    fps: impl IntoIterator<Item = &'a Fingerprint>,
) -> Result<(), CloneError> {
    for fp in fps {
        writeln!(writer, "{fp}").map_err(|e| CloneError::Storage(e.to_string()))?;
    }
    Ok(())
}

//! Lexing of Solidity source, including snippet noise.
//!
//! Comments and `...` placeholders are blanked out of a *cleaned* copy of the
//! source (byte offsets and line/column positions are preserved), so every
//! span the parser later produces can be sliced from the cleaned text without
//! carrying comment or placeholder text along.

use serde::{Deserialize, Serialize};

use super::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    NumberLiteral,
    StringLiteral,
    Symbol,
    Newline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based.
    pub line: u32,
    /// 1-based, counted in characters.
    pub column: u32,
    /// Byte offset into the source.
    pub offset: usize,
}

impl Token {
    pub fn end(&self) -> usize {
        self.offset + self.text.len()
    }

    pub fn is(&self, text: &str) -> bool {
        self.kind != TokenKind::StringLiteral && self.text == text
    }
}

/// Output of [`tokenize`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub placeholders_skipped: usize,
    pub comments_skipped: usize,
    /// The source with comments and placeholders replaced by spaces.
    pub cleaned: String,
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "anonymous", "as", "assembly", "break", "calldata", "catch", "constant",
    "constructor", "continue", "contract", "delete", "do", "else", "emit", "enum", "event",
    "external", "fallback", "false", "for", "function", "if", "immutable", "import", "indexed",
    "interface", "internal", "is", "library", "mapping", "memory", "modifier", "new", "override",
    "payable", "pragma", "private", "public", "pure", "receive", "return", "returns", "revert",
    "storage", "struct", "throw", "true", "try", "type", "unchecked", "using", "view", "virtual",
    "while",
];

const SYMBOLS: &[&str] = &[
    ">>>=", ">>>", ">>=", "<<=", "**", "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "/=", "%=", "|=", "&=", "^=", "=>", "->", "<<", ">>", ":=",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

/// Tokenizes raw bytes. Fails only when the input is not UTF-8.
pub fn tokenize(source: &[u8]) -> Result<TokenStream, ParseError> {
    let text = std::str::from_utf8(source).map_err(|e| ParseError::Encoding {
        offset: e.valid_up_to(),
    })?;
    Ok(tokenize_str(text))
}

pub fn tokenize_str(source: &str) -> TokenStream {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
    out: TokenStream,
    cleaned: Vec<u8>,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            out: TokenStream::default(),
            cleaned: src.as_bytes().to_vec(),
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn current_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    /// Advances over one char, tracking line and column.
    fn bump(&mut self) -> Option<char> {
        let c = self.current_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Advances over one char and blanks it in the cleaned copy.
    fn blank(&mut self) {
        let start = self.pos;
        if let Some(c) = self.bump() {
            if c != '\n' {
                for b in &mut self.cleaned[start..self.pos] {
                    *b = b' ';
                }
            }
        }
    }

    fn push(&mut self, kind: TokenKind, start: usize, line: u32, col: u32) {
        self.out.tokens.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            line,
            column: col,
            offset: start,
        });
    }

    fn run(mut self) -> TokenStream {
        while let Some(c) = self.current_char() {
            let (start, line, col) = (self.pos, self.line, self.col);
            match c {
                '\n' => {
                    self.bump();
                    self.push(TokenKind::Newline, start, line, col);
                }
                c if c.is_whitespace() => {
                    self.bump();
                }
                '/' if self.peek(1) == Some(b'/') => {
                    while self.current_char().is_some_and(|c| c != '\n') {
                        self.blank();
                    }
                    self.out.comments_skipped += 1;
                }
                '/' if self.peek(1) == Some(b'*') => {
                    self.blank();
                    self.blank();
                    while self.pos < self.bytes.len() {
                        if self.peek(0) == Some(b'*') && self.peek(1) == Some(b'/') {
                            self.blank();
                            self.blank();
                            break;
                        }
                        self.blank();
                    }
                    self.out.comments_skipped += 1;
                }
                '.' if self.peek(1) == Some(b'.') && self.peek(2) == Some(b'.') => {
                    while self.peek(0) == Some(b'.') {
                        self.blank();
                    }
                    self.out.placeholders_skipped += 1;
                }
                '…' => {
                    self.blank();
                    self.out.placeholders_skipped += 1;
                }
                '"' | '\'' => {
                    self.string_body(c);
                    self.push(TokenKind::StringLiteral, start, line, col);
                }
                c if c.is_ascii_digit()
                    || (c == '.' && self.peek(1).is_some_and(|b| b.is_ascii_digit())) =>
                {
                    self.number();
                    self.push(TokenKind::NumberLiteral, start, line, col);
                }
                c if c.is_ascii_alphabetic() || c == '_' || c == '$' => {
                    while self
                        .current_char()
                        .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
                    {
                        self.bump();
                    }
                    let word = &self.src[start..self.pos];
                    // hex"..", unicode".." string prefixes
                    if (word == "hex" || word == "unicode")
                        && matches!(self.current_char(), Some('"') | Some('\''))
                    {
                        let q = self.current_char().unwrap();
                        self.string_body(q);
                        self.push(TokenKind::StringLiteral, start, line, col);
                    } else if is_keyword(word) {
                        self.push(TokenKind::Keyword, start, line, col);
                    } else {
                        self.push(TokenKind::Identifier, start, line, col);
                    }
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                        Some(sym) => {
                            for _ in 0..sym.len() {
                                self.bump();
                            }
                        }
                        None => {
                            self.bump();
                        }
                    }
                    self.push(TokenKind::Symbol, start, line, col);
                }
            }
        }
        self.out.cleaned = String::from_utf8(self.cleaned).expect("blanking keeps utf-8");
        self.out
    }

    fn string_body(&mut self, quote: char) {
        self.bump();
        while let Some(c) = self.current_char() {
            if c == '\\' {
                self.bump();
                self.bump();
            } else if c == quote {
                self.bump();
                return;
            } else if c == '\n' {
                // unterminated; stop at line end
                return;
            } else {
                self.bump();
            }
        }
    }

    fn number(&mut self) {
        if self.peek(0) == Some(b'0') && matches!(self.peek(1), Some(b'x') | Some(b'X')) {
            self.bump();
            self.bump();
            while self
                .current_char()
                .is_some_and(|c| c.is_ascii_hexdigit() || c == '_')
            {
                self.bump();
            }
            return;
        }
        while self
            .current_char()
            .is_some_and(|c| c.is_ascii_digit() || c == '_')
        {
            self.bump();
        }
        if self.peek(0) == Some(b'.') && self.peek(1).is_some_and(|b| b.is_ascii_digit()) {
            self.bump();
            while self
                .current_char()
                .is_some_and(|c| c.is_ascii_digit() || c == '_')
            {
                self.bump();
            }
        }
        if matches!(self.peek(0), Some(b'e') | Some(b'E'))
            && (self.peek(1).is_some_and(|b| b.is_ascii_digit())
                || (self.peek(1) == Some(b'-') && self.peek(2).is_some_and(|b| b.is_ascii_digit())))
        {
            self.bump();
            self.bump();
            while self.current_char().is_some_and(|c| c.is_ascii_digit()) {
                self.bump();
            }
        }
    }
}

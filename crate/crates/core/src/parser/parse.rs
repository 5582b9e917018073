use super::ast::{shape_of, AstKind, AstNode, Attrs, SnippetAst, Span};
use super::lexer::{Token, TokenKind, TokenStream};
use super::{ParseError, SyntaxError};

/// Grammar switches. The tolerant grammar lifts definitions and statements to
/// file level and lets a line break stand in for a missing `;`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub tolerant: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { tolerant: true }
    }
}

const VISIBILITY: &[&str] = &["public", "private", "internal", "external"];
const MUTABILITY: &[&str] = &["pure", "view", "payable", "constant", "nonpayable"];
const LOCATIONS: &[&str] = &["memory", "storage", "calldata"];
const ASSIGN_OPS: &[&str] = &[
    "=", "|=", "^=", "&=", "<<=", ">>=", ">>>=", "+=", "-=", "*=", "/=", "%=",
];
const UNITS: &[&str] = &[
    "wei", "gwei", "szabo", "finney", "ether", "seconds", "minutes", "hours", "days", "weeks",
    "years",
];

pub fn parse_tolerant(tokens: &TokenStream) -> Result<SnippetAst, ParseError> {
    parse_with(tokens, ParseOptions::default())
}

pub fn parse_strict(tokens: &TokenStream) -> Result<SnippetAst, ParseError> {
    parse_with(tokens, ParseOptions { tolerant: false })
}

pub fn parse_with(tokens: &TokenStream, opts: ParseOptions) -> Result<SnippetAst, ParseError> {
    let mut p = Parser::new(tokens, opts);
    if !opts.tolerant && tokens.placeholders_skipped > 0 {
        let t = tokens.tokens.first();
        p.errors.push(SyntaxError {
            message: "placeholder `...` is not valid Solidity".into(),
            token: "...".into(),
            line: t.map_or(1, |t| t.line),
            column: t.map_or(1, |t| t.column),
        });
    }
    let roots = p.source_unit();
    if !p.errors.is_empty() {
        let mut errors = p.errors;
        let first = errors.remove(0);
        return Err(ParseError::Syntax {
            first,
            further: errors,
        });
    }
    let pragma = roots
        .iter()
        .find(|r| r.kind == AstKind::Pragma)
        .and_then(|r| r.attrs.value.clone())
        .filter(|v| v.starts_with("solidity"));
    Ok(SnippetAst {
        shape: shape_of(&roots),
        roots,
        placeholders_skipped: tokens.placeholders_skipped,
        source_id: String::new(),
        text: tokens.cleaned.clone(),
        pragma,
    })
}

struct Tok<'a> {
    tok: &'a Token,
    nl_before: bool,
}

struct Parser<'a> {
    toks: Vec<Tok<'a>>,
    src: &'a str,
    pos: usize,
    opts: ParseOptions,
    errors: Vec<SyntaxError>,
    in_modifier: bool,
    /// Parenthesis/bracket depth; newlines never terminate inside.
    nesting: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'a> Parser<'a> {
    fn new(ts: &'a TokenStream, opts: ParseOptions) -> Self {
        let mut toks = Vec::new();
        let mut nl = false;
        for t in &ts.tokens {
            if t.kind == TokenKind::Newline {
                nl = true;
            } else {
                toks.push(Tok { tok: t, nl_before: nl });
                nl = false;
            }
        }
        Parser {
            toks,
            src: &ts.cleaned,
            pos: 0,
            opts,
            errors: Vec::new(),
            in_modifier: false,
            nesting: 0,
        }
    }

    // ---- token helpers ----

    fn peek_at(&self, n: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + n).map(|t| t.tok)
    }

    fn peek(&self) -> Option<&'a Token> {
        self.peek_at(0)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_n(&self, n: usize, text: &str) -> bool {
        self.peek_at(n).is_some_and(|t| t.is(text))
    }

    fn at_eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn newline_before(&self) -> bool {
        self.toks.get(self.pos).is_some_and(|t| t.nl_before)
    }

    fn bump(&mut self) -> &'a Token {
        let t = self.toks[self.pos].tok;
        self.pos += 1;
        t
    }

    fn eat(&mut self, text: &str) -> bool {
        if self.at(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: impl Into<String>) -> SyntaxError {
        match self.peek() {
            Some(t) => SyntaxError {
                message: message.into(),
                token: t.text.clone(),
                line: t.line,
                column: t.column,
            },
            None => {
                let (line, column) = self
                    .toks
                    .last()
                    .map_or((1, 1), |t| (t.tok.line, t.tok.column + t.tok.text.chars().count() as u32));
                SyntaxError {
                    message: message.into(),
                    token: "<eof>".into(),
                    line,
                    column,
                }
            }
        }
    }

    fn expect(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at(text) {
            Ok(self.bump())
        } else {
            Err(self.error_here(format!("expected `{text}`")))
        }
    }

    fn ident(&mut self) -> PResult<&'a Token> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => Ok(self.bump()),
            _ => Err(self.error_here("expected identifier")),
        }
    }

    fn at_ident(&self) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Identifier)
    }

    /// Identifier or a keyword usable as a name in that position.
    fn name_like(&mut self) -> PResult<&'a Token> {
        match self.peek() {
            Some(t)
                if t.kind == TokenKind::Identifier
                    || (t.kind == TokenKind::Keyword
                        && matches!(t.text.as_str(), "receive" | "fallback" | "revert" | "type")) =>
            {
                Ok(self.bump())
            }
            _ => Err(self.error_here("expected name")),
        }
    }

    fn start_span(&self) -> Span {
        match self.peek() {
            Some(t) => Span {
                start: t.offset,
                end: t.offset,
                line: t.line,
                column: t.column,
            },
            None => {
                let end = self.toks.last().map_or(0, |t| t.tok.end());
                Span {
                    start: end,
                    end,
                    line: 1,
                    column: 1,
                }
            }
        }
    }

    fn finish(&self, mut span: Span) -> Span {
        if self.pos > 0 {
            span.end = self.toks[self.pos - 1].tok.end().max(span.start);
        }
        span
    }

    fn node(&self, kind: AstKind, start: Span) -> AstNode {
        AstNode::new(kind, self.finish(start))
    }

    fn text_of(&self, span: Span) -> String {
        collapse_ws(&self.src[span.start..span.end])
    }

    /// A `;`, or in tolerant mode a line break / closing brace / end of input.
    fn terminator(&mut self) -> PResult<()> {
        if self.eat(";") {
            return Ok(());
        }
        if self.opts.tolerant
            && self.nesting == 0
            && (self.at_eof() || self.newline_before() || self.at("}"))
        {
            return Ok(());
        }
        Err(self.error_here("expected `;`"))
    }

    /// Skips to a statement boundary after an error; always makes progress.
    fn recover(&mut self) {
        let start = self.pos;
        let mut depth = 0usize;
        while !self.at_eof() {
            if self.pos > start && depth == 0 && self.newline_before() {
                break;
            }
            let t = self.peek().unwrap();
            if t.is("{") {
                depth += 1;
            } else if t.is("}") {
                if depth == 0 {
                    if self.pos == start {
                        self.pos += 1;
                    }
                    break;
                }
                depth -= 1;
            } else if t.is(";") && depth == 0 {
                self.pos += 1;
                break;
            }
            self.pos += 1;
        }
        self.nesting = 0;
    }

    // ---- file level ----

    fn source_unit(&mut self) -> Vec<AstNode> {
        let mut roots = Vec::new();
        while !self.at_eof() {
            let before = self.pos;
            match self.top_level_item() {
                Ok(Some(n)) => roots.push(n),
                Ok(None) => {}
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
            if self.pos == before {
                self.pos += 1;
            }
        }
        roots
    }

    fn top_level_item(&mut self) -> PResult<Option<AstNode>> {
        let t = self.peek().unwrap();
        match t.text.as_str() {
            "pragma" if t.kind == TokenKind::Keyword => self.pragma().map(Some),
            "import" if t.kind == TokenKind::Keyword => self.directive().map(Some),
            "contract" | "library" | "interface" | "abstract" if t.kind == TokenKind::Keyword => {
                self.contract().map(Some)
            }
            ";" => {
                self.bump();
                Ok(None)
            }
            _ => {
                if let Some(def) = self.member_definition()? {
                    return Ok(Some(def));
                }
                if !self.opts.tolerant {
                    // strict file level also admits constant declarations
                    if let Some(decl) = self.try_var_decl(true)? {
                        return Ok(Some(decl));
                    }
                    return Err(self.error_here("statement outside of a function"));
                }
                self.statement().map(Some)
            }
        }
    }

    fn pragma(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let vstart = self.start_span();
        let first = self.pos;
        while !self.at_eof() && !self.at(";") && !(self.pos > first && self.newline_before()) {
            self.bump();
        }
        let vspan = self.finish(vstart);
        self.terminator()?;
        let mut n = self.node(AstKind::Pragma, start);
        n.attrs.value = Some(self.text_of(vspan).replace(' ', ""));
        if let Some(v) = &mut n.attrs.value {
            if let Some(rest) = v.strip_prefix("solidity") {
                *v = format!("solidity {rest}");
            }
        }
        Ok(n)
    }

    fn directive(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let kw = self.bump().text.clone();
        while !self.at_eof() && !self.at(";") && !self.at("}") {
            if self.opts.tolerant && self.newline_before() && self.pos > 0 {
                break;
            }
            self.bump();
        }
        self.terminator()?;
        let mut n = self.node(AstKind::Directive, start);
        n.attrs.name = Some(kw);
        Ok(n)
    }

    /// Definitions legal both at file level and inside a contract.
    fn member_definition(&mut self) -> PResult<Option<AstNode>> {
        let Some(t) = self.peek() else { return Ok(None) };
        let kw = t.kind == TokenKind::Keyword;
        let node = match t.text.as_str() {
            "function" if kw => self.function(AstKind::FunctionDef)?,
            "modifier" if kw => self.function(AstKind::ModifierDef)?,
            "constructor" if kw => self.function(AstKind::ConstructorDef)?,
            "fallback" | "receive" if kw && self.at_n(1, "(") => {
                self.function(AstKind::FunctionDef)?
            }
            "event" if kw => self.event()?,
            "struct" if kw => self.struct_def()?,
            "enum" if kw => self.enum_def()?,
            "using" if kw => self.directive()?,
            "error"
                if t.kind == TokenKind::Identifier
                    && self.peek_at(1).is_some_and(|n| n.kind == TokenKind::Identifier)
                    && self.at_n(2, "(") =>
            {
                self.error_def()?
            }
            _ => return Ok(None),
        };
        Ok(Some(node))
    }

    fn contract(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let mut flavor = String::new();
        if self.eat("abstract") {
            flavor.push_str("abstract ");
        }
        let kw = self.bump();
        if !matches!(kw.text.as_str(), "contract" | "library" | "interface") {
            return Err(self.error_here("expected contract, library or interface"));
        }
        flavor.push_str(&kw.text);
        let name = self.ident()?.text.clone();
        let mut bases = Vec::new();
        if self.eat("is") {
            loop {
                let b = self.type_name()?;
                bases.push(b.attrs.type_name.clone().unwrap_or_default());
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.expect("{")?;
        let mut members = Vec::new();
        while !self.at("}") && !self.at_eof() {
            let before = self.pos;
            match self.contract_member() {
                Ok(Some(m)) => members.push(m),
                Ok(None) => {}
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
            if self.pos == before {
                self.pos += 1;
            }
        }
        self.expect("}")?;
        let mut n = self.node(AstKind::ContractDef, start);
        n.attrs.name = Some(name);
        n.attrs.flavor = Some(flavor);
        n.attrs.bases = bases;
        n.children = members;
        Ok(n)
    }

    fn contract_member(&mut self) -> PResult<Option<AstNode>> {
        if self.eat(";") {
            return Ok(None);
        }
        if let Some(def) = self.member_definition()? {
            return Ok(Some(def));
        }
        if self.at("contract") || self.at("library") || self.at("interface") {
            return self.contract().map(Some);
        }
        match self.try_var_decl(true)? {
            Some(field) => Ok(Some(field)),
            None => Err(self.error_here("expected contract member")),
        }
    }

    fn function(&mut self, kind: AstKind) -> PResult<AstNode> {
        let start = self.start_span();
        let kw = self.bump().text.clone();
        let mut attrs = Attrs::default();
        let mut kind = kind;
        match kw.as_str() {
            "fallback" | "receive" => attrs.flavor = Some(kw.clone()),
            "function" | "modifier" if !self.at("(") => {
                if let Ok(t) = self.name_like() {
                    attrs.name = Some(t.text.clone());
                }
            }
            _ => {}
        }
        let mut children = Vec::new();
        if self.at("(") {
            children.extend(self.param_list(false)?);
        } else if !self.opts.tolerant || kind == AstKind::ConstructorDef {
            // tolerated: `function name public ...` with the list omitted
            return Err(self.error_here("expected `(`"));
        }
        // header specifiers
        while let Some(t) = self.peek() {
            let text = t.text.as_str();
            if VISIBILITY.contains(&text) {
                attrs.visibility = Some(self.bump().text.clone());
            } else if MUTABILITY.contains(&text) {
                let m = self.bump().text.clone();
                if m == "payable" {
                    attrs.payable = true;
                }
                attrs.mutability = Some(m);
            } else if text == "virtual" {
                self.bump();
            } else if text == "override" {
                self.bump();
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
            } else if text == "returns" {
                self.bump();
                let mut rets = self.param_list(false)?;
                for r in &mut rets {
                    r.attrs.is_return = true;
                }
                children.extend(rets);
            } else if t.kind == TokenKind::Identifier {
                let m = self.bump().text.clone();
                // qualified base constructor invocations like `Base.init`
                let mut m = m;
                while self.eat(".") {
                    m.push('.');
                    m.push_str(&self.ident()?.text);
                }
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
                attrs.modifiers.push(m);
            } else {
                break;
            }
        }
        if kind == AstKind::FunctionDef
            && attrs.name.is_none()
            && attrs.flavor.is_none()
            && kw == "function"
        {
            attrs.flavor = Some("fallback".into());
        }
        if self.at("{") {
            let prev = self.in_modifier;
            self.in_modifier = kind == AstKind::ModifierDef;
            let body = self.block();
            self.in_modifier = prev;
            children.push(body?);
        } else {
            self.terminator()?;
        }
        if kind == AstKind::ConstructorDef {
            attrs.name = None;
        }
        if kw == "constructor" {
            kind = AstKind::ConstructorDef;
        }
        let mut n = self.node(kind, start);
        n.attrs = attrs;
        n.children = children;
        Ok(n)
    }

    fn param_list(&mut self, event: bool) -> PResult<Vec<AstNode>> {
        self.expect("(")?;
        self.nesting += 1;
        let mut params = Vec::new();
        while !self.at(")") {
            let start = self.start_span();
            let ty = self.type_name()?;
            let mut attrs = Attrs {
                type_name: ty.attrs.type_name.clone(),
                ..Attrs::default()
            };
            loop {
                if let Some(t) = self.peek() {
                    if LOCATIONS.contains(&t.text.as_str()) {
                        attrs.location = Some(self.bump().text.clone());
                        continue;
                    }
                    if event && t.is("indexed") {
                        self.bump();
                        continue;
                    }
                }
                break;
            }
            if self.at_ident() || self.peek().is_some_and(|t| t.kind == TokenKind::Keyword && matches!(t.text.as_str(), "receive" | "fallback")) {
                attrs.name = Some(self.bump().text.clone());
            }
            let mut n = self.node(AstKind::ParamDecl, start);
            n.attrs = attrs;
            params.push(n);
            if !self.eat(",") {
                break;
            }
        }
        self.nesting -= 1;
        self.expect(")")?;
        Ok(params)
    }

    fn event(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let name = self.ident()?.text.clone();
        let params = self.param_list(true)?;
        self.eat("anonymous");
        self.terminator()?;
        let mut n = self.node(AstKind::EventDef, start);
        n.attrs.name = Some(name);
        n.children = params;
        Ok(n)
    }

    fn error_def(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let name = self.ident()?.text.clone();
        let params = self.param_list(false)?;
        self.terminator()?;
        let mut n = self.node(AstKind::ErrorDef, start);
        n.attrs.name = Some(name);
        n.children = params;
        Ok(n)
    }

    fn struct_def(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let name = self.ident()?.text.clone();
        self.expect("{")?;
        let mut fields = Vec::new();
        while !self.at("}") && !self.at_eof() {
            let fstart = self.start_span();
            let ty = self.type_name()?;
            let fname = self.ident()?.text.clone();
            self.terminator()?;
            let mut f = self.node(AstKind::FieldDecl, fstart);
            f.attrs.name = Some(fname);
            f.attrs.type_name = ty.attrs.type_name;
            fields.push(f);
        }
        self.expect("}")?;
        let mut n = self.node(AstKind::StructDef, start);
        n.attrs.name = Some(name);
        n.children = fields;
        Ok(n)
    }

    fn enum_def(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let name = self.ident()?.text.clone();
        self.skip_balanced("{", "}")?;
        let mut n = self.node(AstKind::EnumDef, start);
        n.attrs.name = Some(name);
        Ok(n)
    }

    fn skip_balanced(&mut self, open: &str, close: &str) -> PResult<()> {
        self.expect(open)?;
        let mut depth = 1;
        while depth > 0 {
            if self.at_eof() {
                return Err(self.error_here(format!("unbalanced `{open}`")));
            }
            let t = self.bump();
            if t.is(open) {
                depth += 1;
            } else if t.is(close) {
                depth -= 1;
            }
        }
        Ok(())
    }

    // ---- types ----

    /// Parses a type name; the returned node only carries `type_name`.
    fn type_name(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        if self.eat("mapping") {
            self.expect("(")?;
            self.nesting += 1;
            self.type_name()?;
            if self.at_ident() {
                self.bump();
            }
            self.expect("=>")?;
            self.type_name()?;
            if self.at_ident() {
                self.bump();
            }
            self.nesting -= 1;
            self.expect(")")?;
        } else if self.at("function") {
            self.bump();
            self.skip_balanced("(", ")")?;
            while self.peek().is_some_and(|t| {
                VISIBILITY.contains(&t.text.as_str()) || MUTABILITY.contains(&t.text.as_str())
            }) {
                self.bump();
            }
            if self.eat("returns") {
                self.skip_balanced("(", ")")?;
            }
        } else {
            let t = self.peek().ok_or_else(|| self.error_here("expected type"))?;
            let ok = t.kind == TokenKind::Identifier || t.is("address") || t.is("payable");
            if !ok {
                return Err(self.error_here("expected type"));
            }
            let first = self.bump().text.clone();
            while self.at(".") && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier) {
                self.bump();
                self.bump();
            }
            if first == "address" && self.at("payable") {
                self.bump();
            }
        }
        while self.at("[") {
            self.bump();
            self.nesting += 1;
            if !self.at("]") {
                self.expression()?;
            }
            self.nesting -= 1;
            self.expect("]")?;
        }
        let mut n = self.node(AstKind::Empty, start);
        n.attrs.type_name = Some(self.text_of(n.span));
        Ok(n)
    }

    /// Speculatively parses `Type [location|specifiers] name [= expr] ;`.
    /// Returns `Ok(None)` (with position restored) when the tokens do not
    /// form a declaration.
    fn try_var_decl(&mut self, field: bool) -> PResult<Option<AstNode>> {
        let save = self.pos;
        let saved_errors = self.errors.len();
        let start = self.start_span();
        let Ok(ty) = self.type_name() else {
            self.pos = save;
            self.nesting = 0;
            return Ok(None);
        };
        let mut attrs = Attrs {
            type_name: ty.attrs.type_name,
            ..Attrs::default()
        };
        while let Some(t) = self.peek() {
            let text = t.text.as_str();
            if LOCATIONS.contains(&text) {
                attrs.location = Some(self.bump().text.clone());
            } else if field && VISIBILITY.contains(&text) {
                attrs.visibility = Some(self.bump().text.clone());
            } else if field && matches!(text, "constant" | "immutable") {
                attrs.mutability = Some(self.bump().text.clone());
            } else if field && text == "override" {
                self.bump();
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
            } else {
                break;
            }
        }
        // Declarations need a name, except the normalized `T memory = x` form.
        let has_name = self.at_ident() && !self.newline_before();
        if !has_name && !(attrs.location.is_some() && (self.at("=") || self.at(";"))) {
            self.pos = save;
            self.nesting = 0;
            self.errors.truncate(saved_errors);
            return Ok(None);
        }
        if has_name {
            attrs.name = Some(self.bump().text.clone());
        }
        let mut children = Vec::new();
        if self.eat("=") {
            children.push(self.expression()?);
        } else if !(self.at(";") || self.at("}") || self.at_eof() || (self.opts.tolerant && self.newline_before())) {
            self.pos = save;
            self.nesting = 0;
            self.errors.truncate(saved_errors);
            return Ok(None);
        }
        self.terminator()?;
        let kind = if field {
            AstKind::FieldDecl
        } else {
            AstKind::VarDecl
        };
        let mut n = self.node(kind, start);
        n.attrs = attrs;
        n.children = children;
        Ok(Some(n))
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.expect("{")?;
        let saved_nesting = std::mem::replace(&mut self.nesting, 0);
        let mut stmts = Vec::new();
        while !self.at("}") && !self.at_eof() {
            let before = self.pos;
            match self.statement() {
                Ok(s) => stmts.push(s),
                Err(e) => {
                    self.errors.push(e);
                    self.recover();
                }
            }
            if self.pos == before {
                self.pos += 1;
            }
        }
        self.nesting = saved_nesting;
        self.expect("}")?;
        let mut n = self.node(AstKind::Block, start);
        n.children = stmts;
        Ok(n)
    }

    fn statement(&mut self) -> PResult<AstNode> {
        let t = self.peek().ok_or_else(|| self.error_here("expected statement"))?;
        let kw = t.kind == TokenKind::Keyword;
        match t.text.as_str() {
            "{" => self.block(),
            "if" if kw => self.if_stmt(),
            "for" if kw => self.for_stmt(),
            "while" if kw => self.while_stmt(),
            "do" if kw => self.do_while(),
            "return" if kw => {
                let start = self.start_span();
                self.bump();
                let mut n_children = Vec::new();
                if !self.at(";") && !self.at("}") && !self.at_eof() && !(self.opts.tolerant && self.newline_before()) {
                    n_children.push(self.expression()?);
                }
                self.terminator()?;
                let mut n = self.node(AstKind::Return, start);
                n.children = n_children;
                Ok(n)
            }
            "emit" if kw => {
                let start = self.start_span();
                self.bump();
                let call = self.expression()?;
                self.terminator()?;
                let mut n = self.node(AstKind::EmitStmt, start);
                n.children.push(call);
                Ok(n)
            }
            "break" | "continue" if kw => {
                let start = self.start_span();
                let kind = if self.bump().text == "break" {
                    AstKind::Break
                } else {
                    AstKind::Continue
                };
                self.terminator()?;
                Ok(self.node(kind, start))
            }
            "throw" if kw => {
                let start = self.start_span();
                self.bump();
                self.terminator()?;
                let mut n = self.node(AstKind::Revert, start);
                n.attrs.name = Some("throw".into());
                Ok(n)
            }
            "unchecked" if kw && self.at_n(1, "{") => {
                self.bump();
                let mut b = self.block()?;
                b.attrs.unchecked = true;
                Ok(b)
            }
            "assembly" if kw => {
                let start = self.start_span();
                self.bump();
                if self.peek().is_some_and(|t| t.kind == TokenKind::StringLiteral) {
                    self.bump();
                }
                if self.at("(") {
                    self.skip_balanced("(", ")")?;
                }
                self.skip_balanced("{", "}")?;
                Ok(self.node(AstKind::InlineAssembly, start))
            }
            "try" if kw => self.try_stmt(),
            "_" if self.in_modifier
                && (self.at_n(1, ";")
                    || self.peek_at(1).is_none()
                    || self.at_n(1, "}")
                    || self.toks.get(self.pos + 1).is_some_and(|t| t.nl_before)) =>
            {
                let start = self.start_span();
                self.bump();
                self.terminator()?;
                Ok(self.node(AstKind::PlaceholderUnderscore, start))
            }
            "(" => {
                if let Some(d) = self.try_tuple_decl()? {
                    return Ok(d);
                }
                self.expression_statement()
            }
            _ => {
                if let Some(decl) = self.try_var_decl(false)? {
                    return Ok(decl);
                }
                self.expression_statement()
            }
        }
    }

    fn expression_statement(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let e = self.expression()?;
        self.terminator()?;
        let mut n = self.node(AstKind::ExpressionStmt, start);
        n.children.push(e);
        Ok(n)
    }

    fn try_tuple_decl(&mut self) -> PResult<Option<AstNode>> {
        let save = self.pos;
        let saved_errors = self.errors.len();
        let start = self.start_span();
        let attempt = (|| -> PResult<Option<AstNode>> {
            self.expect("(")?;
            self.nesting += 1;
            let mut decls = Vec::new();
            let mut any = false;
            loop {
                if self.at(",") || self.at(")") {
                    decls.push(AstNode::new(AstKind::Empty, self.start_span()));
                } else {
                    let dstart = self.start_span();
                    let ty = self.type_name()?;
                    let mut attrs = Attrs {
                        type_name: ty.attrs.type_name,
                        ..Attrs::default()
                    };
                    if self.peek().is_some_and(|t| LOCATIONS.contains(&t.text.as_str())) {
                        attrs.location = Some(self.bump().text.clone());
                    }
                    attrs.name = Some(self.ident()?.text.clone());
                    let mut d = self.node(AstKind::VarDecl, dstart);
                    d.attrs = attrs;
                    decls.push(d);
                    any = true;
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.nesting -= 1;
            self.expect(")")?;
            if !any {
                return Ok(None);
            }
            let mut children = decls;
            if self.eat("=") {
                children.push(self.expression()?);
            } else {
                return Ok(None);
            }
            self.terminator()?;
            let mut n = self.node(AstKind::TupleVarDecl, start);
            n.children = children;
            Ok(Some(n))
        })();
        match attempt {
            Ok(Some(n)) => Ok(Some(n)),
            _ => {
                self.pos = save;
                self.nesting = 0;
                self.errors.truncate(saved_errors);
                Ok(None)
            }
        }
    }

    fn paren_condition(&mut self) -> PResult<AstNode> {
        self.expect("(")?;
        self.nesting += 1;
        let c = self.expression()?;
        self.nesting -= 1;
        self.expect(")")?;
        Ok(c)
    }

    fn if_stmt(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let cond = self.paren_condition()?;
        let then = self.statement()?;
        let mut children = vec![cond, then];
        if self.eat("else") {
            children.push(self.statement()?);
        }
        let mut n = self.node(AstKind::If, start);
        n.children = children;
        Ok(n)
    }

    fn while_stmt(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let cond = self.paren_condition()?;
        let body = self.statement()?;
        let mut n = self.node(AstKind::While, start);
        n.children = vec![cond, body];
        Ok(n)
    }

    fn do_while(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let body = self.statement()?;
        self.expect("while")?;
        let cond = self.paren_condition()?;
        self.terminator()?;
        let mut n = self.node(AstKind::DoWhile, start);
        n.children = vec![body, cond];
        Ok(n)
    }

    fn for_stmt(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        self.expect("(")?;
        self.nesting += 1;
        let init = if self.eat(";") {
            AstNode::new(AstKind::Empty, self.start_span())
        } else if let Some(d) = self.try_var_decl(false)? {
            d
        } else {
            let s = self.start_span();
            let e = self.expression()?;
            self.expect(";")?;
            let mut n = self.node(AstKind::ExpressionStmt, s);
            n.children.push(e);
            n
        };
        let cond = if self.at(";") {
            AstNode::new(AstKind::Empty, self.start_span())
        } else {
            self.expression()?
        };
        self.expect(";")?;
        let update = if self.at(")") {
            AstNode::new(AstKind::Empty, self.start_span())
        } else {
            let s = self.start_span();
            let e = self.expression()?;
            let mut n = self.node(AstKind::ExpressionStmt, s);
            n.children.push(e);
            n
        };
        self.nesting -= 1;
        self.expect(")")?;
        let body = self.statement()?;
        let mut n = self.node(AstKind::For, start);
        n.children = vec![init, cond, update, body];
        Ok(n)
    }

    fn try_stmt(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        self.bump();
        let s = self.start_span();
        let e = self.expression()?;
        let mut call_stmt = self.node(AstKind::ExpressionStmt, s);
        call_stmt.children.push(e);
        let mut children = vec![call_stmt];
        if self.eat("returns") {
            self.param_list(false)?;
        }
        children.push(self.block()?);
        while self.eat("catch") {
            if self.at_ident() {
                self.bump();
            }
            if self.at("(") {
                self.param_list(false)?;
            }
            children.push(self.block()?);
        }
        let mut n = self.node(AstKind::Block, start);
        n.attrs.name = Some("try".into());
        n.children = children;
        Ok(n)
    }

    // ---- expressions ----

    fn expression(&mut self) -> PResult<AstNode> {
        self.assignment()
    }

    fn assignment(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let lhs = self.conditional()?;
        if let Some(op) = self.peek().filter(|t| ASSIGN_OPS.contains(&t.text.as_str()) && t.kind == TokenKind::Symbol) {
            let op = op.text.clone();
            self.bump();
            let rhs = self.assignment()?;
            let mut n = self.node(AstKind::Assignment, start);
            n.attrs.operator = Some(op);
            n.children = vec![lhs, rhs];
            return Ok(n);
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let cond = self.binary(0)?;
        if self.eat("?") {
            self.nesting += 1;
            let a = self.assignment()?;
            self.expect(":")?;
            self.nesting -= 1;
            let b = self.assignment()?;
            let mut n = self.node(AstKind::Conditional, start);
            n.children = vec![cond, a, b];
            return Ok(n);
        }
        Ok(cond)
    }

    fn binary(&mut self, min_level: usize) -> PResult<AstNode> {
        const LEVELS: &[&[&str]] = &[
            &["||"],
            &["&&"],
            &["==", "!="],
            &["<", ">", "<=", ">="],
            &["|"],
            &["^"],
            &["&"],
            &["<<", ">>", ">>>"],
            &["+", "-"],
            &["*", "/", "%"],
            &["**"],
        ];
        if min_level >= LEVELS.len() {
            return self.unary();
        }
        let start = self.start_span();
        let mut lhs = self.binary(min_level + 1)?;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Symbol || !LEVELS[min_level].contains(&t.text.as_str()) {
                break;
            }
            let op = self.bump().text.clone();
            let rhs = if op == "**" {
                self.binary(min_level)?
            } else {
                self.binary(min_level + 1)?
            };
            let mut n = self.node(AstKind::BinaryOp, start);
            n.attrs.operator = Some(op);
            n.children = vec![lhs, rhs];
            lhs = n;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        if let Some(t) = self.peek() {
            let op = t.text.as_str();
            let is_prefix = (t.kind == TokenKind::Symbol
                && matches!(op, "!" | "~" | "-" | "+" | "++" | "--"))
                || (t.kind == TokenKind::Keyword && op == "delete");
            if is_prefix {
                let op = self.bump().text.clone();
                let operand = self.unary()?;
                let mut n = self.node(AstKind::UnaryOp, start);
                n.attrs.operator = Some(op);
                n.attrs.prefix = true;
                n.children = vec![operand];
                return Ok(n);
            }
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let mut e = self.primary()?;
        loop {
            if self.at(".") {
                self.bump();
                let member = self.name_like().or_else(|_| {
                    // `x.address`, `type(X).max` style members
                    match self.peek() {
                        Some(t) if t.kind == TokenKind::Keyword => Ok(self.bump()),
                        _ => Err(self.error_here("expected member name")),
                    }
                })?;
                let name = member.text.clone();
                let mut n = self.node(AstKind::MemberAccess, start);
                n.attrs.name = Some(name);
                n.children = vec![e];
                e = n;
            } else if self.at("[") {
                self.bump();
                self.nesting += 1;
                let mut children = vec![e];
                if !self.at("]") {
                    let idx = self.expression()?;
                    if self.eat(":") && !self.at("]") {
                        self.expression()?;
                    }
                    children.push(idx);
                }
                self.nesting -= 1;
                self.expect("]")?;
                let mut n = self.node(AstKind::Index, start);
                n.children = children;
                e = n;
            } else if self.at("(") {
                self.bump();
                self.nesting += 1;
                let mut children = vec![e];
                if self.at("{") {
                    // named arguments
                    self.bump();
                    while !self.at("}") {
                        self.name_like()?;
                        self.expect(":")?;
                        children.push(self.expression()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                    self.expect("}")?;
                } else {
                    while !self.at(")") {
                        children.push(self.expression()?);
                        if !self.eat(",") {
                            break;
                        }
                    }
                }
                self.nesting -= 1;
                self.expect(")")?;
                let mut n = self.node(call_kind(&children[0]), start);
                if n.kind != AstKind::Call {
                    children.remove(0);
                    n.attrs.name = Some(match n.kind {
                        AstKind::Require => "require".into(),
                        AstKind::Assert => "assert".into(),
                        _ => "revert".into(),
                    });
                }
                n.children = children;
                e = n;
            } else if self.at("{")
                && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Identifier)
                && self.at_n(2, ":")
            {
                self.bump();
                self.nesting += 1;
                let mut names = Vec::new();
                let mut children = vec![e];
                while !self.at("}") {
                    names.push(self.ident()?.text.clone());
                    self.expect(":")?;
                    children.push(self.expression()?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.nesting -= 1;
                self.expect("}")?;
                let mut n = self.node(AstKind::CallOptions, start);
                n.attrs.option_names = names;
                n.children = children;
                e = n;
            } else if (self.at("++") || self.at("--")) && !(self.nesting == 0 && self.newline_before()) {
                let op = self.bump().text.clone();
                let mut n = self.node(AstKind::UnaryOp, start);
                n.attrs.operator = Some(op);
                n.children = vec![e];
                e = n;
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<AstNode> {
        let start = self.start_span();
        let t = self.peek().ok_or_else(|| self.error_here("expected expression"))?;
        match t.kind {
            TokenKind::NumberLiteral => {
                self.bump();
                let mut text = t.text.clone();
                if let Some(u) = self.peek().filter(|u| {
                    u.kind == TokenKind::Identifier && UNITS.contains(&u.text.as_str()) && !self.newline_before()
                }) {
                    text = format!("{text} {}", u.text);
                    self.bump();
                }
                let mut n = self.node(AstKind::Literal, start);
                n.attrs.literal_kind = Some(if t.text.starts_with("0x") && t.text.len() == 42 {
                    "address".into()
                } else {
                    "number".into()
                });
                n.attrs.value = Some(text);
                Ok(n)
            }
            TokenKind::StringLiteral => {
                let mut value = String::new();
                let mut kind = "string";
                while let Some(s) = self.peek().filter(|s| s.kind == TokenKind::StringLiteral) {
                    if s.text.starts_with("hex") {
                        kind = "hex";
                    }
                    value.push_str(&s.text);
                    self.bump();
                }
                let mut n = self.node(AstKind::Literal, start);
                n.attrs.literal_kind = Some(kind.into());
                n.attrs.value = Some(value);
                Ok(n)
            }
            TokenKind::Identifier => {
                self.bump();
                let mut n = self.node(AstKind::Identifier, start);
                n.attrs.name = Some(t.text.clone());
                if t.text == "address" && self.at("payable") && !self.at_n(1, "(") {
                    self.bump();
                    n = self.node(AstKind::Identifier, start);
                    n.attrs.name = Some("address payable".into());
                }
                Ok(n)
            }
            TokenKind::Keyword => match t.text.as_str() {
                "true" | "false" => {
                    self.bump();
                    let mut n = self.node(AstKind::Literal, start);
                    n.attrs.literal_kind = Some("bool".into());
                    n.attrs.value = Some(t.text.clone());
                    Ok(n)
                }
                "new" => {
                    self.bump();
                    let ty = self.type_name()?;
                    let mut n = self.node(AstKind::New, start);
                    n.attrs.type_name = ty.attrs.type_name;
                    Ok(n)
                }
                "payable" | "type" | "revert" | "mapping" => {
                    if t.text == "mapping" {
                        return Err(self.error_here("unexpected `mapping`"));
                    }
                    self.bump();
                    let mut n = self.node(AstKind::Identifier, start);
                    n.attrs.name = Some(t.text.clone());
                    Ok(n)
                }
                _ => Err(self.error_here(format!("unexpected keyword `{}`", t.text))),
            },
            TokenKind::Symbol if t.is("(") => {
                self.bump();
                self.nesting += 1;
                let mut items = Vec::new();
                loop {
                    if self.at(",") || self.at(")") {
                        items.push(AstNode::new(AstKind::Empty, self.start_span()));
                    } else {
                        items.push(self.expression()?);
                    }
                    if !self.eat(",") {
                        break;
                    }
                }
                self.nesting -= 1;
                self.expect(")")?;
                if items.len() == 1 && items[0].kind != AstKind::Empty {
                    // parenthesized expression keeps its inner node
                    return Ok(items.pop().unwrap());
                }
                let mut n = self.node(AstKind::Tuple, start);
                n.children = items;
                Ok(n)
            }
            TokenKind::Symbol if t.is("[") => {
                self.bump();
                self.nesting += 1;
                let mut items = Vec::new();
                while !self.at("]") {
                    items.push(self.expression()?);
                    if !self.eat(",") {
                        break;
                    }
                }
                self.nesting -= 1;
                self.expect("]")?;
                let mut n = self.node(AstKind::Tuple, start);
                n.attrs.name = Some("array".into());
                n.children = items;
                Ok(n)
            }
            _ => Err(self.error_here(format!("unexpected `{}`", t.text))),
        }
    }
}

fn call_kind(callee: &AstNode) -> AstKind {
    if callee.kind == AstKind::Identifier {
        match callee.name() {
            Some("require") => return AstKind::Require,
            Some("assert") => return AstKind::Assert,
            Some("revert") => return AstKind::Revert,
            _ => {}
        }
    }
    AstKind::Call
}

pub(crate) fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

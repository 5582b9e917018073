//! Identifier-insensitive rewriting of parsed snippets.
//!
//! Renaming decisions are taken on the AST and applied to the token stream of
//! the cleaned source, which is then re-emitted with canonical spacing. Every
//! name the rewrite produces is a fixed point of the rewrite, so normalizing a
//! normalized text changes nothing.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::parser::{is_keyword, parse_source, tokenize_str, AstKind, AstNode, ParseError, SnippetAst, Token, TokenKind};

/// Identifiers kept verbatim: language globals and the literal stand-in.
const BUILTINS: &[&str] = &[
    "_", "abi", "addmod", "assert", "block", "blockhash", "ecrecover", "gasleft", "keccak256",
    "msg", "mulmod", "now", "require", "revert", "ripemd160", "selfdestruct", "sha256", "sha3",
    "stringLiteral", "suicide", "super", "this", "tx", "type",
];

/// Header keywords dropped from the output unless used as a call (`payable(x)`).
const DROPPED: &[&str] = &[
    "public", "private", "internal", "external", "view", "pure", "constant", "payable", "immutable",
];

const STRING_STAND_IN: &str = "stringLiteral";
const DEFAULT_TYPE: &str = "uint";

pub fn is_elementary_type(word: &str) -> bool {
    let sized = |prefix: &str| {
        word.strip_prefix(prefix)
            .is_some_and(|rest| rest.is_empty() || rest.bytes().all(|b| b.is_ascii_digit() || b == b'x'))
    };
    matches!(word, "address" | "bool" | "string" | "byte" | "var")
        || sized("uint")
        || sized("int")
        || sized("bytes")
        || sized("ufixed")
        || sized("fixed")
}

/// Parses `source` tolerantly and normalizes it.
pub fn normalize_source(source: &str) -> Result<String, ParseError> {
    Ok(normalize(&parse_source(source)?))
}

/// Contracts become `c`, libraries `l`, functions `f`, modifiers `m`;
/// variables take their declared type name (`uint` when none is known),
/// parameter names disappear, string literals become `stringLiteral`, and
/// visibility and mutability keywords are dropped.
pub fn normalize(ast: &SnippetAst) -> String {
    let tokens: Vec<Token> = tokenize_str(&ast.text)
        .tokens
        .into_iter()
        .filter(|t| t.kind != TokenKind::Newline)
        .collect();
    let names = Names::collect(ast);
    let mut rw = Rewriter {
        tokens: &tokens,
        names: &names,
        edits: HashMap::new(),
        semicolons: BTreeSet::new(),
    };
    let globals = Scope::default().with(&names.top_level_vars).with(&names.all_fields);
    for root in &ast.roots {
        rw.visit(root, None, &globals);
    }
    let (edits, semicolons) = (rw.edits, rw.semicolons);
    let mut out: Vec<String> = Vec::with_capacity(tokens.len());
    for (i, t) in tokens.iter().enumerate() {
        let prev_dot = i > 0 && tokens[i - 1].is(".");
        let text = match edits.get(&i) {
            Some(Edit::Drop) => None,
            Some(Edit::Replace(s)) => Some(s.clone()),
            None => Some(default_token(t, tokens.get(i + 1), prev_dot, &names)),
        };
        out.extend(text);
        if semicolons.contains(&i) {
            out.push(";".into());
        }
    }
    join_canonical(&out)
}

fn default_token(t: &Token, next: Option<&Token>, prev_dot: bool, names: &Names) -> String {
    match t.kind {
        TokenKind::StringLiteral => STRING_STAND_IN.into(),
        TokenKind::Keyword if DROPPED.contains(&t.text.as_str()) && !next.is_some_and(|n| n.is("(")) => {
            String::new()
        }
        TokenKind::Identifier if !prev_dot => names.global_rename(&t.text).unwrap_or(&t.text).to_string(),
        _ => t.text.clone(),
    }
}

/// Space-separated, except around `.`, brackets, `;` and `,`.
fn join_canonical(tokens: &[String]) -> String {
    let mut s = String::new();
    let mut prev: Option<&str> = None;
    for t in tokens.iter().filter(|t| !t.is_empty()) {
        if let Some(p) = prev {
            let tight = matches!(t.as_str(), "." | "(" | ")" | "[" | "]" | ";" | ",")
                || matches!(p, "." | "(" | "[");
            if !tight {
                s.push(' ');
            }
        }
        s.push_str(t);
        prev = Some(t);
    }
    s
}

enum Edit {
    Drop,
    Replace(String),
}

/// Snippet-wide declarations.
#[derive(Default)]
struct Names {
    contracts: HashMap<String, &'static str>,
    functions: HashSet<String>,
    modifiers: HashSet<String>,
    all_fields: HashMap<String, String>,
    top_level_vars: HashMap<String, String>,
}

impl Names {
    fn collect(ast: &SnippetAst) -> Names {
        let mut n = Names::default();
        for root in &ast.roots {
            root.walk(&mut |node| match node.kind {
                AstKind::ContractDef => {
                    if let Some(name) = node.name() {
                        let short = if node.attrs.flavor.as_deref() == Some("library") { "l" } else { "c" };
                        n.contracts.insert(name.to_string(), short);
                    }
                }
                AstKind::FunctionDef => {
                    n.functions.extend(node.name().map(str::to_string));
                }
                AstKind::ModifierDef => {
                    n.modifiers.extend(node.name().map(str::to_string));
                }
                _ => {}
            });
        }
        // type keys depend on the contract names, so they are resolved last
        for root in &ast.roots {
            root.walk(&mut |node| {
                if node.kind == AstKind::FieldDecl {
                    if let Some(name) = node.name() {
                        let key = n.type_key(node.attrs.type_name.as_deref());
                        n.all_fields.insert(name.to_string(), key);
                    }
                }
            });
            if !root.kind.is_definition() {
                let mut vars = HashMap::new();
                n.declared_in(root, &mut vars);
                n.top_level_vars.extend(vars);
            }
        }
        n
    }

    fn global_rename(&self, word: &str) -> Option<&str> {
        if let Some(short) = self.contracts.get(word) {
            Some(short)
        } else if self.modifiers.contains(word) {
            Some("m")
        } else if self.functions.contains(word) {
            Some("f")
        } else {
            None
        }
    }

    /// The identifier a variable of the given declared type is renamed to.
    fn type_key(&self, type_name: Option<&str>) -> String {
        let Some(t) = type_name.map(str::trim) else {
            return DEFAULT_TYPE.into();
        };
        if t.starts_with("mapping") {
            // `mapping` cannot stand as an identifier; the value type does
            let value = t.rsplit("=>").next().unwrap_or("").trim_end_matches(|c: char| c == ')' || c.is_whitespace());
            return self.type_key(Some(value));
        }
        let base = t.split('[').next().unwrap_or("");
        let word = base.split_whitespace().next().unwrap_or("");
        let word = word.rsplit('.').next().unwrap_or("");
        if word.is_empty() || word == "var" || is_keyword(word) {
            return DEFAULT_TYPE.into();
        }
        match self.contracts.get(word) {
            Some(short) => (*short).into(),
            None => word.into(),
        }
    }

    /// Variables declared anywhere below `node`, without descending into
    /// nested definitions.
    fn declared_in(&self, node: &AstNode, out: &mut HashMap<String, String>) {
        if matches!(node.kind, AstKind::VarDecl | AstKind::ParamDecl) {
            if let Some(name) = node.name() {
                out.insert(name.to_string(), self.type_key(node.attrs.type_name.as_deref()));
            }
        }
        for c in &node.children {
            if !c.kind.is_definition() {
                self.declared_in(c, out);
            }
        }
    }
}

/// Name → type key, innermost first.
#[derive(Default, Clone)]
struct Scope<'a> {
    frames: Vec<&'a HashMap<String, String>>,
}

impl<'a> Scope<'a> {
    fn with(&self, frame: &'a HashMap<String, String>) -> Scope<'a> {
        let mut frames = vec![frame];
        frames.extend(self.frames.iter().copied());
        Scope { frames }
    }

    fn lookup(&self, name: &str) -> Option<&'a str> {
        self.frames.iter().find_map(|f| f.get(name).map(String::as_str))
    }
}

struct Rewriter<'t> {
    tokens: &'t [Token],
    names: &'t Names,
    edits: HashMap<usize, Edit>,
    /// Token indices after which a missing `;` is restored.
    semicolons: BTreeSet<usize>,
}

impl Rewriter<'_> {
    fn visit(&mut self, node: &AstNode, parent: Option<&AstNode>, scope: &Scope<'_>) {
        match node.kind {
            AstKind::ContractDef => {
                let short = if node.attrs.flavor.as_deref() == Some("library") { "l" } else { "c" };
                self.rename_definition(node, short);
                let fields: HashMap<String, String> = node
                    .children
                    .iter()
                    .filter(|c| c.kind == AstKind::FieldDecl)
                    .filter_map(|c| Some((c.name()?.to_string(), self.names.type_key(c.attrs.type_name.as_deref()))))
                    .collect();
                let inner = scope.with(&fields);
                for c in &node.children {
                    self.visit(c, Some(node), &inner);
                }
                return;
            }
            AstKind::FunctionDef | AstKind::ModifierDef | AstKind::ConstructorDef => {
                match node.kind {
                    AstKind::FunctionDef => self.rename_definition(node, "f"),
                    AstKind::ModifierDef => self.rename_definition(node, "m"),
                    _ => {}
                }
                let mut locals = HashMap::new();
                self.names.declared_in(node, &mut locals);
                let inner = scope.with(&locals);
                for c in &node.children {
                    self.visit(c, Some(node), &inner);
                }
                return;
            }
            AstKind::ParamDecl => {
                if let Some(i) = self.declared_name_token(node) {
                    self.edits.insert(i, Edit::Drop);
                }
            }
            AstKind::VarDecl | AstKind::FieldDecl => {
                if let Some(i) = self.declared_name_token(node) {
                    let key = self.names.type_key(node.attrs.type_name.as_deref());
                    self.edits.insert(i, Edit::Replace(key));
                }
            }
            AstKind::Identifier => {
                if let (Some(name), Some(i)) = (node.name(), self.token_at(node.span.start)) {
                    let callee = parent.is_some_and(|p| {
                        p.kind == AstKind::Call && p.children.first().is_some_and(|c| c.span == node.span)
                    });
                    if let Some(r) = self.rename_use(name, callee, scope) {
                        self.edits.insert(i, Edit::Replace(r));
                    }
                }
            }
            _ => {}
        }
        if is_statement(node.kind) {
            self.restore_semicolon(node);
        }
        for c in &node.children {
            self.visit(c, Some(node), scope);
        }
    }

    fn rename_use(&self, name: &str, callee: bool, scope: &Scope<'_>) -> Option<String> {
        if let Some(key) = scope.lookup(name) {
            return Some(key.to_string());
        }
        if let Some(r) = self.names.global_rename(name) {
            return Some(r.to_string());
        }
        let keep = callee
            || BUILTINS.contains(&name)
            || is_elementary_type(name)
            || name.starts_with(|c: char| c.is_ascii_uppercase());
        (!keep).then(|| DEFAULT_TYPE.to_string())
    }

    fn rename_definition(&mut self, node: &AstNode, short: &str) {
        let Some(name) = node.name() else { return };
        let limit = node.children.first().map_or(node.span.end, |c| c.span.start);
        let found = self.tokens_in(node.span.start, limit).find(|&i| self.tokens[i].text == name);
        if let Some(i) = found {
            self.edits.insert(i, Edit::Replace(short.into()));
        }
    }

    /// The name token of a declaration: the last occurrence before any child.
    fn declared_name_token(&self, node: &AstNode) -> Option<usize> {
        let name = node.name()?;
        let limit = node.children.first().map_or(node.span.end, |c| c.span.start);
        self.tokens_in(node.span.start, limit).filter(|&i| self.tokens[i].text == name).last()
    }

    fn restore_semicolon(&mut self, node: &AstNode) {
        let Some(last) = self.tokens_in(node.span.start, node.span.end).last() else { return };
        if self.tokens[last].is(";") || self.tokens[last].is("}") {
            return;
        }
        let next = self.tokens.get(last + 1);
        if !next.is_some_and(|t| t.is(";") || t.is(",") || t.is(")")) {
            self.semicolons.insert(last);
        }
    }

    fn token_at(&self, offset: usize) -> Option<usize> {
        let i = self.tokens.partition_point(|t| t.offset < offset);
        (i < self.tokens.len() && self.tokens[i].offset == offset).then_some(i)
    }

    fn tokens_in(&self, start: usize, end: usize) -> impl Iterator<Item = usize> + '_ {
        let from = self.tokens.partition_point(|t| t.offset < start);
        (from..self.tokens.len()).take_while(move |&i| self.tokens[i].end() <= end)
    }
}

fn is_statement(kind: AstKind) -> bool {
    matches!(
        kind,
        AstKind::ExpressionStmt
            | AstKind::VarDecl
            | AstKind::TupleVarDecl
            | AstKind::Return
            | AstKind::EmitStmt
            | AstKind::Break
            | AstKind::Continue
            | AstKind::FieldDecl
            | AstKind::PlaceholderUnderscore
    )
}

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AstKind {
    ContractDef,
    FunctionDef,
    ModifierDef,
    ConstructorDef,
    ParamDecl,
    VarDecl,
    TupleVarDecl,
    FieldDecl,
    StructDef,
    EventDef,
    EnumDef,
    ErrorDef,
    Block,
    If,
    For,
    While,
    DoWhile,
    Return,
    EmitStmt,
    ExpressionStmt,
    Break,
    Continue,
    Call,
    CallOptions,
    MemberAccess,
    Index,
    BinaryOp,
    UnaryOp,
    Conditional,
    Tuple,
    New,
    Identifier,
    Literal,
    Assignment,
    Require,
    Revert,
    Assert,
    PlaceholderUnderscore,
    InlineAssembly,
    Pragma,
    Directive,
    /// Absent optional slot (e.g. the missing condition of `for (;;)`).
    Empty,
}

impl AstKind {
    pub fn is_definition(self) -> bool {
        matches!(
            self,
            AstKind::ContractDef
                | AstKind::FunctionDef
                | AstKind::ModifierDef
                | AstKind::ConstructorDef
                | AstKind::StructDef
                | AstKind::EventDef
                | AstKind::EnumDef
                | AstKind::ErrorDef
                | AstKind::Pragma
                | AstKind::Directive
        )
    }

    pub fn is_function_like(self) -> bool {
        matches!(
            self,
            AstKind::FunctionDef | AstKind::ModifierDef | AstKind::ConstructorDef
        )
    }
}

/// Byte span into the cleaned source, plus the 1-based position of its start.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Attrs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub type_name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub visibility: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mutability: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub modifiers: Vec<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub payable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    /// `contract`, `library`, `interface` for contracts; `fallback`/`receive` for functions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flavor: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub bases: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub literal_kind: Option<String>,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub prefix: bool,
    /// Keys of `{value: .., gas: ..}` call options, parallel to the option children.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub option_names: Vec<String>,
    /// Marks named return parameters.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub is_return: bool,
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub unchecked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AstNode {
    pub kind: AstKind,
    pub span: Span,
    pub attrs: Attrs,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn new(kind: AstKind, span: Span) -> Self {
        AstNode {
            kind,
            span,
            attrs: Attrs::default(),
            children: Vec::new(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.attrs.name.as_deref()
    }

    /// Source text of this node, sliced from the cleaned source.
    pub fn text<'a>(&self, source: &'a str) -> &'a str {
        source.get(self.span.start..self.span.end).unwrap_or("")
    }

    /// Pre-order walk.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a AstNode)) {
        f(self);
        for c in &self.children {
            c.walk(f);
        }
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(AstNode::count).sum::<usize>()
    }

    /// The same tree with spans zeroed, for structural comparison.
    pub fn without_spans(&self) -> AstNode {
        AstNode {
            kind: self.kind,
            span: Span::default(),
            attrs: self.attrs.clone(),
            children: self.children.iter().map(AstNode::without_spans).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    Contract,
    Function,
    Statement,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnippetAst {
    pub roots: Vec<AstNode>,
    pub shape: Shape,
    pub placeholders_skipped: usize,
    pub source_id: String,
    /// Cleaned source all spans index into.
    pub text: String,
    pub pragma: Option<String>,
}

impl SnippetAst {
    pub fn node_text(&self, node: &AstNode) -> &str {
        node.text(&self.text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ast serializes")
    }

    /// Major/minor of the `pragma solidity` version, when one is recorded.
    pub fn pragma_version(&self) -> Option<(u32, u32)> {
        let p = self.pragma.as_deref()?;
        let digits: String = p
            .chars()
            .skip_while(|c| !c.is_ascii_digit())
            .take_while(|c| c.is_ascii_digit() || *c == '.')
            .collect();
        let mut it = digits.split('.');
        let major = it.next()?.parse().ok()?;
        let minor = it.next().and_then(|m| m.parse().ok()).unwrap_or(0);
        Some((major, minor))
    }
}

pub fn classify_shape(ast: &SnippetAst) -> Shape {
    shape_of(&ast.roots)
}

pub(crate) fn shape_of(roots: &[AstNode]) -> Shape {
    if roots.iter().any(|r| r.kind == AstKind::ContractDef) {
        Shape::Contract
    } else if roots.iter().any(|r| r.kind.is_function_like()) {
        Shape::Function
    } else {
        Shape::Statement
    }
}

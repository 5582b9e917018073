//! Tolerant Solidity parsing.
//!
//! Three snippet defects are accepted on top of ordinary Solidity: contracts,
//! functions, modifiers and bare statements may appear at file level; a line
//! break closes a statement whose `;` is missing; and `...` placeholders are
//! skipped by the lexer. [`parse_strict`] disables all three.

mod ast;
mod lexer;
mod parse;

use std::fmt;

pub use ast::{classify_shape, AstKind, AstNode, Attrs, Shape, SnippetAst, Span};
pub use lexer::{is_keyword, tokenize, tokenize_str, Token, TokenKind, TokenStream, KEYWORDS};
pub use parse::{parse_strict, parse_tolerant, parse_with, ParseOptions};

pub(crate) use parse::collapse_ws;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SyntaxError {
    pub message: String,
    /// Text of the offending token, `<eof>` at end of input.
    pub token: String,
    pub line: u32,
    pub column: u32,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} (at `{}`)",
            self.line, self.column, self.message, self.token
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("input is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { offset: usize },
    #[error("syntax error at {first}")]
    Syntax {
        first: SyntaxError,
        /// Errors after the first one, found during recovery.
        further: Vec<SyntaxError>,
    },
}

impl ParseError {
    pub fn diagnostics(&self) -> Vec<SyntaxError> {
        match self {
            ParseError::Encoding { .. } => Vec::new(),
            ParseError::Syntax { first, further } => {
                std::iter::once(first.clone()).chain(further.iter().cloned()).collect()
            }
        }
    }
}

/// Tokenizes and parses `source` with the tolerant grammar.
pub fn parse_source(source: &str) -> Result<SnippetAst, ParseError> {
    parse_tolerant(&tokenize_str(source))
}

pub fn parse_bytes(source: &[u8]) -> Result<SnippetAst, ParseError> {
    parse_tolerant(&tokenize(source)?)
}

/// Tokenizes and parses with the strict grammar: no file-level statements, no
/// newline termination, no placeholders.
pub fn parse_source_strict(source: &str) -> Result<SnippetAst, ParseError> {
    parse_strict(&tokenize_str(source))
}

#[cfg(test)]
mod tests {
    use super::*;

    const GUARDED_WITHDRAW: &str = include_str!("../../tests/fixtures/guarded_withdraw.sol");

    fn kinds(ast: &SnippetAst) -> Vec<AstKind> {
        ast.roots.iter().map(|r| r.kind).collect()
    }

    #[test]
    fn guarded_withdraw_is_two_contracts() {
        let ast = parse_source(GUARDED_WITHDRAW).unwrap();
        assert_eq!(ast.shape, Shape::Contract);
        assert_eq!(kinds(&ast), [AstKind::ContractDef, AstKind::ContractDef]);
        assert_eq!(ast.placeholders_skipped, 1);
        let main = &ast.roots[1];
        assert_eq!(main.attrs.bases, ["Parent"]);
        let withdraw = main
            .children
            .iter()
            .find(|c| c.name() == Some("withdrawAll"))
            .unwrap();
        assert_eq!(withdraw.attrs.modifiers, ["onlyOwner"]);
        assert_eq!(withdraw.attrs.visibility.as_deref(), Some("public"));
        let fallback = &main.children[2];
        assert_eq!(fallback.kind, AstKind::FunctionDef);
        assert_eq!(fallback.attrs.flavor.as_deref(), Some("fallback"));
        assert!(fallback.attrs.payable);
    }

    #[test]
    fn bare_function_has_function_shape() {
        let ast = parse_source("function f() { msg.sender.transfer(1); }").unwrap();
        assert_eq!(ast.shape, Shape::Function);
        assert_eq!(classify_shape(&ast), Shape::Function);
    }

    #[test]
    fn newline_terminates_statements() {
        let ast = parse_source("uint x = 1\nx = x + 1").unwrap();
        assert_eq!(ast.shape, Shape::Statement);
        assert_eq!(kinds(&ast), [AstKind::VarDecl, AstKind::ExpressionStmt]);
        let assign = &ast.roots[1].children[0];
        assert_eq!(assign.kind, AstKind::Assignment);
        assert_eq!(assign.children[1].kind, AstKind::BinaryOp);
    }

    #[test]
    fn newline_inside_parentheses_is_insignificant() {
        let ast = parse_source("f(a,\n  b)\ng()").unwrap();
        assert_eq!(ast.roots.len(), 2);
        assert_eq!(ast.roots[0].children[0].children.len(), 3);
    }

    #[test]
    fn prose_is_rejected_with_first_token() {
        let err = parse_source("if you want to send ether, use transfer").unwrap_err();
        let ParseError::Syntax { first, .. } = err else {
            panic!("expected syntax error")
        };
        assert_eq!(first.line, 1);
    }

    #[test]
    fn underscore_only_in_modifiers() {
        let ast = parse_source("modifier m() { _; }").unwrap();
        assert_eq!(ast.roots[0].children[0].children[0].kind, AstKind::PlaceholderUnderscore);
        let ast = parse_source("function g() { _; }").unwrap();
        let mut seen = false;
        ast.roots[0].walk(&mut |n| seen |= n.kind == AstKind::PlaceholderUnderscore);
        assert!(!seen);
    }

    #[test]
    fn call_options_and_old_style_value() {
        let ast = parse_source("a.call{value: 1, gas: 2}(\"\");\nb.call.value(3)();").unwrap();
        let opts = &ast.roots[0].children[0].children[0];
        assert_eq!(opts.kind, AstKind::CallOptions);
        assert_eq!(opts.attrs.option_names, ["value", "gas"]);
        let outer = &ast.roots[1].children[0];
        assert_eq!(outer.kind, AstKind::Call);
        assert_eq!(outer.children[0].kind, AstKind::Call);
    }

    #[test]
    fn require_assert_revert_nodes() {
        let ast = parse_source("require(a, \"m\");\nassert(b);\nrevert();\nthrow;").unwrap();
        let got: Vec<_> = ast
            .roots
            .iter()
            .map(|r| r.children.first().map_or(r.kind, |c| c.kind))
            .collect();
        assert_eq!(got, [AstKind::Require, AstKind::Assert, AstKind::Revert, AstKind::Revert]);
        assert_eq!(ast.roots[0].children[0].children.len(), 2);
    }

    #[test]
    fn assembly_is_opaque() {
        let ast = parse_source("function f() { assembly { let x := mload(0) } }").unwrap();
        let body = &ast.roots[0].children[0];
        assert_eq!(body.children[0].kind, AstKind::InlineAssembly);
        assert!(body.children[0].children.is_empty());
    }

    #[test]
    fn pragma_is_recorded() {
        let ast = parse_source("pragma solidity ^0.8.4;\ncontract C {}").unwrap();
        assert_eq!(ast.pragma.as_deref(), Some("solidity ^0.8.4"));
        assert_eq!(ast.pragma_version(), Some((0, 8)));
    }

    #[test]
    fn strict_rejects_tolerance_features() {
        assert!(parse_source_strict("x = 1;").is_err());
        assert!(parse_source_strict("contract C { function f() { a = 1 } }").is_err());
        assert!(parse_source_strict("contract C { function f() { ... } }").is_err());
        assert!(parse_source_strict("contract C { function f() { a = 1; } }").is_ok());
    }

    #[test]
    fn spans_nest_and_skip_comments() {
        let src = "contract C { /* note */ function f() { x = 1; // tail\n ... } }";
        let ast = parse_source(src).unwrap();
        fn check(n: &AstNode, src: &str) {
            let text = n.text(src);
            assert!(!text.contains("note") && !text.contains("tail") && !text.contains("..."));
            for c in &n.children {
                if c.kind != AstKind::Empty {
                    assert!(n.span.contains(&c.span), "{:?} in {:?}", c.kind, n.kind);
                }
                check(c, src);
            }
        }
        for r in &ast.roots {
            check(r, &ast.text);
        }
    }

    #[test]
    fn tuple_declaration_and_unnamed_declaration() {
        let ast = parse_source("(uint a, , bool b) = f();\nuint[] memory = x;").unwrap();
        assert_eq!(ast.roots[0].kind, AstKind::TupleVarDecl);
        assert_eq!(ast.roots[1].kind, AstKind::VarDecl);
        assert_eq!(ast.roots[1].name(), None);
    }

    #[test]
    fn contextual_error_keyword() {
        let ast = parse_source("error Unauthorized(address who);\nuint error = 1;").unwrap();
        assert_eq!(ast.roots[0].kind, AstKind::ErrorDef);
        assert_eq!(ast.roots[1].kind, AstKind::VarDecl);
    }

    #[test]
    fn encoding_error_surfaces() {
        assert!(matches!(parse_bytes(&[0xc3]), Err(ParseError::Encoding { offset: 0 })));
    }
}

//! Code property graph: syntax, evaluation order and data flow over one snippet.
//!
//! [`build_cpg`] runs translation, wrapper inference, modifier expansion,
//! resolution, then the EOG and DFG passes, always in that order. Node ids are
//! assigned in creation order, so the same AST always yields the same graph.

mod dfg;
mod eog;
mod export;
mod graph;
mod modifiers;
mod resolve;
mod translate;
mod types;
mod wrappers;

pub use export::{from_json, to_dot, to_json, GRAPH_FORMAT, GRAPH_VERSION};
pub use graph::{CpgEdge, CpgGraph, CpgNode, EdgeId, EdgeLabel, Label, LabelSet, NodeId, Props};
pub use types::{builtin_type, element_type, is_elementary};

use crate::parser::SnippetAst;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CpgError {
    #[error("cannot translate {0}")]
    Unsupported(String),
    #[error("cannot import graph: {0}")]
    Import(String),
}

pub fn build_cpg(ast: &SnippetAst) -> Result<CpgGraph, CpgError> {
    let mut g = translate::translate(ast)?;
    wrappers::infer_wrappers(&mut g);
    modifiers::expand_modifiers(&mut g);
    resolve::resolve(&mut g);
    eog::pass_eog(&mut g);
    dfg::pass_dfg(&mut g);
    Ok(g)
}

/// Parses `source` tolerantly and builds its graph.
pub fn build_from_source(source: &str) -> Result<CpgGraph, crate::Error> {
    let ast = crate::parser::parse_source(source)?;
    Ok(build_cpg(&ast)?)
}

impl CpgGraph {
    /// Nodes with no path from a root over AST edges.
    pub fn unreachable_nodes(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.node_count()];
        for &r in &self.roots {
            for n in self.ast_subtree(r) {
                seen[n as usize] = true;
            }
        }
        (0..self.node_count() as NodeId).filter(|&n| !seen[n as usize]).collect()
    }

    /// The function, constructor or modifier whose body contains `n`.
    pub fn enclosing_function(&self, mut n: NodeId) -> Option<NodeId> {
        while let Some(p) = self.ast_parent(n) {
            let node = self.node(p);
            if node.has(Label::Function) || node.has(Label::Modifier) {
                return Some(p);
            }
            n = p;
        }
        None
    }

    /// First node whose `code` equals `code` and that carries `label`.
    pub fn find_code(&self, label: Label, code: &str) -> Option<NodeId> {
        self.nodes()
            .iter()
            .find(|n| n.has(label) && n.code() == code)
            .map(|n| n.id)
    }

    pub fn eog_successors(&self, n: NodeId) -> Vec<NodeId> {
        self.targets(n, EdgeLabel::Eog)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    const GUARDED_WITHDRAW: &str = include_str!("../../tests/fixtures/guarded_withdraw.sol");

    fn build(src: &str) -> CpgGraph {
        build_cpg(&parse_source(src).unwrap()).unwrap()
    }

    #[test]
    fn guarded_withdraw_structure() {
        let g = build(GUARDED_WITHDRAW);
        let records: Vec<&str> = g
            .nodes_with(Label::Record)
            .map(|r| g.node(r).local_name())
            .collect();
        assert_eq!(records, ["Parent", "Main"]);
        let fields: Vec<&str> = g.nodes_with(Label::Field).map(|f| g.node(f).local_name()).collect();
        assert_eq!(fields.iter().filter(|f| **f == "owner").count(), 1);
        let ctors: Vec<NodeId> = g.nodes_with(Label::Constructor).collect();
        assert_eq!(ctors.len(), 2);
        for c in ctors {
            assert!(g.node(c).has(Label::Function));
        }
        assert!(g.unreachable_nodes().is_empty());
    }

    #[test]
    fn fig2_evaluation_order_and_fan_in() {
        let g = build("contract C { address owner; function f() public { if (msg.sender == owner) {} } }");
        let sender = g.find_code(Label::Member, "msg.sender").unwrap();
        let owner = g
            .nodes_with(Label::Reference)
            .find(|&n| g.node(n).code() == "owner")
            .unwrap();
        let eq = g.find_code(Label::BinaryOperator, "msg.sender == owner").unwrap();
        let iff = g.nodes_with(Label::If).next().unwrap();
        assert!(g.has_edge(sender, owner, EdgeLabel::Eog));
        assert!(g.has_edge(owner, eq, EdgeLabel::Eog));
        assert!(g.has_edge(eq, iff, EdgeLabel::Eog));
        assert!(g.has_edge(sender, eq, EdgeLabel::Dfg));
        assert!(g.has_edge(owner, eq, EdgeLabel::Dfg));
        assert!(g.has_edge(eq, iff, EdgeLabel::Dfg));
        let field = g.nodes_with(Label::Field).next().unwrap();
        assert!(g.has_edge(field, owner, EdgeLabel::Dfg));
    }

    #[test]
    fn require_branches_to_rollback() {
        let g = build("function f(uint c) { require(c > 0); c = 1; }");
        let req = g.find_code(Label::Call, "require(c > 0)").unwrap();
        let succ = g.eog_successors(req);
        assert_eq!(succ.len(), 2);
        let rb = succ.iter().copied().find(|&s| g.node(s).has(Label::Rollback)).unwrap();
        assert!(g.eog_successors(rb).is_empty());
        let next = succ.iter().copied().find(|&s| s != rb).unwrap();
        assert_eq!(g.node(next).code(), "c");
    }

    #[test]
    fn revert_ends_the_path() {
        let g = build("function f() { revert(\"no\"); }");
        let call = g.find_code(Label::Call, "revert(\"no\")").unwrap();
        let succ = g.eog_successors(call);
        assert_eq!(succ.len(), 1);
        assert!(g.node(succ[0]).has(Label::Rollback));
    }

    #[test]
    fn straight_line_block_is_a_chain() {
        let g = build("function f() { a(); b(); c(); }");
        let calls: Vec<NodeId> = ["a()", "b()", "c()"]
            .iter()
            .map(|c| g.find_code(Label::Call, c).unwrap())
            .collect();
        let a_callee = g.target(calls[1], EdgeLabel::Callee).unwrap();
        assert!(g.has_edge(calls[0], a_callee, EdgeLabel::Eog));
        let c_callee = g.target(calls[2], EdgeLabel::Callee).unwrap();
        assert!(g.has_edge(calls[1], c_callee, EdgeLabel::Eog));
    }

    #[test]
    fn modifier_copy_precedes_the_body() {
        let g = build(GUARDED_WITHDRAW);
        let wd = g
            .nodes_with(Label::Function)
            .find(|&f| g.node(f).local_name() == "withdrawAll")
            .unwrap();
        let body = g.target(wd, EdgeLabel::Body).unwrap();
        assert_eq!(g.node(body).str_prop("modifier"), Some("onlyOwner"));
        let stmts = g.ast_children(body);
        assert!(g.node(stmts[0]).local_name() == "require");
        let owner_ref = g
            .ast_subtree(stmts[0])
            .into_iter()
            .find(|&n| g.node(n).code() == "owner")
            .unwrap();
        let decl = g.target(owner_ref, EdgeLabel::RefersTo).unwrap();
        assert!(g.node(decl).has(Label::Field));
        assert_eq!(g.node(decl).str_prop("name"), Some("Parent.owner"));
    }

    #[test]
    fn two_placeholders_duplicate_the_body() {
        let src = "contract C {\n modifier twice() { _; _; }\n function f() twice { g(); }\n function g() {}\n}";
        let g = build(src);
        let copies = g
            .nodes()
            .iter()
            .filter(|n| n.has(Label::Call) && n.code() == "g()")
            .count();
        assert_eq!(copies, 2);
    }

    #[test]
    fn wrappers_by_shape() {
        let g = build("uint x = 1\nx = x + 1");
        let rec: Vec<NodeId> = g.nodes_with(Label::Record).collect();
        assert_eq!(rec.len(), 1);
        assert!(g.node(rec[0]).is_inferred());
        let funcs: Vec<NodeId> = g.nodes_with(Label::Function).collect();
        assert_eq!(funcs.len(), 1);
        assert!(g.node(funcs[0]).is_inferred());
        assert_eq!(g.node(funcs[0]).local_name(), "");

        let g = build("function f() { msg.sender.transfer(1); }");
        assert_eq!(g.nodes().iter().filter(|n| n.has(Label::Record) && n.is_inferred()).count(), 1);
        assert_eq!(g.nodes().iter().filter(|n| n.has(Label::Function) && n.is_inferred()).count(), 0);

        let g = build("contract C { function f() {} }");
        assert!(g.nodes().iter().all(|n| !n.is_inferred() || n.prop("builtin").is_some()));
    }

    #[test]
    fn empty_snippet_is_a_single_root() {
        let g = build("");
        assert_eq!(g.node_count(), 1);
        assert!(g.node(g.roots[0]).has(Label::TranslationUnit));
    }

    #[test]
    fn calls_resolve_by_name_and_arity() {
        let g = build("contract C { function f(uint x) {} function h() { f(1); externalLib.g(); } }");
        let fcall = g.find_code(Label::Call, "f(1)").unwrap();
        assert!(g.target(fcall, EdgeLabel::Invokes).is_some());
        let gcall = g.find_code(Label::Call, "externalLib.g()").unwrap();
        assert!(g.target(gcall, EdgeLabel::Invokes).is_none());
    }

    #[test]
    fn assignment_flows_into_the_field() {
        let g = build(GUARDED_WITHDRAW);
        let field = g.nodes_with(Label::Field).next().unwrap();
        let sender = g
            .nodes()
            .iter()
            .find(|n| n.has(Label::Member) && n.code() == "msg.sender" && {
                let f = g.enclosing_function(n.id).unwrap();
                g.node(f).has(Label::Constructor)
            })
            .unwrap()
            .id;
        let assign = g.target(sender, EdgeLabel::Dfg).unwrap();
        let lhs = g.target(assign, EdgeLabel::Dfg).unwrap();
        assert!(g.has_edge(lhs, field, EdgeLabel::Dfg));
    }

    #[test]
    fn unused_literal_has_no_flow_to_declarations() {
        let g = build("function f() { 5; }");
        let lit = g.nodes_with(Label::Literal).next().unwrap();
        assert!(g
            .targets(lit, EdgeLabel::Dfg)
            .iter()
            .all(|&t| !g.node(t).has(Label::Variable)));
    }

    #[test]
    fn call_options_shape() {
        let g = build("function f(address a) { a.call{value: 1}(\"\"); }");
        let call = g.nodes_with(Label::Call).next().unwrap();
        assert_eq!(g.node(call).local_name(), "call");
        let spec = g.target(call, EdgeLabel::Callee).unwrap();
        assert!(g.node(spec).has(Label::Specified));
        let kv = g.target(spec, EdgeLabel::Specifiers).unwrap();
        let key = g.target(kv, EdgeLabel::Key).unwrap();
        assert_eq!(g.node(key).local_name(), "value");
        assert!(g.target(call, EdgeLabel::Base).is_some());
    }

    #[test]
    fn old_style_value_chain_reaches_call() {
        let g = build("function f() { msg.sender.call.value(1)(\"\"); }");
        let inner = g
            .nodes_with(Label::Call)
            .find(|&c| g.node(c).local_name() == "value")
            .unwrap();
        let me = g.target(inner, EdgeLabel::Callee).unwrap();
        let base = g.target(me, EdgeLabel::Base).unwrap();
        assert_eq!(g.node(base).local_name(), "call");
    }

    #[test]
    fn json_round_trip_and_dot() {
        let g = build(GUARDED_WITHDRAW);
        let back = from_json(&to_json(&g)).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.edges(), g.edges());
        let dot = to_dot(&g);
        for c in ["color=green", "color=blue", "color=gray"] {
            assert!(dot.contains(c));
        }
        let empty = to_dot(&CpgGraph::new());
        assert!(empty.starts_with("digraph") && empty.trim_end().ends_with('}'));
    }

    #[test]
    fn build_is_deterministic() {
        let a = build(GUARDED_WITHDRAW);
        let b = build(GUARDED_WITHDRAW);
        assert_eq!(to_json(&a), to_json(&b));
    }
}

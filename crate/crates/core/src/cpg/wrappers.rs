//! Wraps top-level functions, fields and statements of a partial snippet in
//! inferred declarations so every node sits under a record.

use super::graph::{CpgGraph, EdgeLabel, Label, NodeId};

pub(crate) fn infer_wrappers(g: &mut CpgGraph) {
    let Some(&tu) = g.roots.first() else { return };
    let top = g.ast_children(tu);
    let mut members = Vec::new();
    let mut statements = Vec::new();
    for n in top {
        let node = g.node(n);
        if node.has(Label::Record) || node.has(Label::Type) || node.has(Label::Declaration) {
            continue;
        }
        if node.has(Label::Function) || node.has(Label::Modifier) || node.has(Label::Field) {
            members.push(n);
        } else {
            statements.push(n);
        }
    }
    if members.is_empty() && statements.is_empty() {
        return;
    }
    let moved: Vec<NodeId> = members.iter().chain(&statements).copied().collect();
    g.remove_edges(|e| e.label == EdgeLabel::Ast && e.from == tu && moved.contains(&e.to));

    let record = inferred(g, &[Label::Record]);
    g.set_prop(record, "kind", "contract");
    g.set_prop(record, "superClasses", serde_json::Value::Array(Vec::new()));
    g.add_edge(tu, record, EdgeLabel::Ast);
    for m in members {
        g.add_edge(record, m, EdgeLabel::Ast);
        if g.node(m).has(Label::Field) {
            g.add_edge(record, m, EdgeLabel::Fields);
        }
    }
    if !statements.is_empty() {
        let f = inferred(g, &[Label::Function]);
        g.set_prop(f, "modifiers", serde_json::Value::Array(Vec::new()));
        let body = inferred(g, &[Label::Block]);
        g.add_edge(record, f, EdgeLabel::Ast);
        g.add_edge(f, body, EdgeLabel::Ast);
        g.add_edge(f, body, EdgeLabel::Body);
        for s in statements {
            g.add_edge(body, s, EdgeLabel::Ast);
        }
    }
}

fn inferred(g: &mut CpgGraph, labels: &[Label]) -> NodeId {
    let id = g.add_node(labels);
    for key in ["code", "localName", "name"] {
        g.set_prop(id, key, "");
    }
    g.set_prop(id, "isInferred", true);
    id
}

//! Inlines modifier bodies around function bodies at each placeholder.

use std::collections::HashMap;

use serde_json::Value;

use super::graph::{CpgEdge, CpgGraph, EdgeLabel, Label, NodeId};

pub(crate) fn expand_modifiers(g: &mut CpgGraph) {
    let functions: Vec<NodeId> = g
        .nodes_with(Label::Function)
        .filter(|&f| !g.node(f).has(Label::Modifier))
        .collect();
    let record_names: Vec<String> = g
        .nodes_with(Label::Record)
        .map(|r| g.node(r).local_name().to_string())
        .collect();
    for f in functions {
        let invoked: Vec<String> = match g.node(f).prop("modifiers") {
            Some(Value::Array(a)) => a.iter().filter_map(|v| v.as_str().map(String::from)).collect(),
            _ => continue,
        };
        if invoked.is_empty() {
            continue;
        }
        let Some(mut body) = g.target(f, EdgeLabel::Body) else { continue };
        let original = body;
        for name in invoked.iter().rev() {
            let Some(m) = find_modifier(g, f, name) else {
                // base-constructor calls share the header slot with modifiers
                if !record_names.iter().any(|r| r == name) {
                    let fname = g.node(f).str_prop("name").unwrap_or("").to_string();
                    g.diagnostics
                        .push(format!("unresolved modifier `{name}` on `{fname}`"));
                }
                continue;
            };
            let Some(mbody) = g.target(m, EdgeLabel::Body) else {
                g.diagnostics.push(format!("modifier `{name}` has no body"));
                continue;
            };
            let holes = g
                .ast_subtree(mbody)
                .into_iter()
                .filter(|&n| g.node(n).has(Label::Placeholder))
                .count();
            if holes == 0 {
                g.diagnostics
                    .push(format!("modifier `{name}` has no placeholder; not expanded"));
                continue;
            }
            let copy = copy_with_substitution(g, mbody, Some(body));
            g.set_prop(copy, "modifier", name.as_str());
            body = copy;
        }
        if body != original {
            g.remove_edges(|e| {
                e.from == f && e.to == original && matches!(e.label, EdgeLabel::Ast | EdgeLabel::Body)
            });
            g.add_edge(f, body, EdgeLabel::Ast);
            g.add_edge(f, body, EdgeLabel::Body);
        }
    }
}

/// Looks up `name` in the function's record, then its bases, then anywhere.
fn find_modifier(g: &CpgGraph, f: NodeId, name: &str) -> Option<NodeId> {
    let record = enclosing_record(g, f);
    let mut order: Vec<NodeId> = Vec::new();
    if let Some(r) = record {
        order.push(r);
        order.extend(ancestors(g, r));
    }
    let in_record = |r: NodeId| {
        g.ast_children(r)
            .into_iter()
            .find(|&c| g.node(c).has(Label::Modifier) && g.node(c).local_name() == name)
    };
    order
        .into_iter()
        .find_map(in_record)
        .or_else(|| {
            g.nodes_with(Label::Modifier)
                .find(|&m| g.node(m).local_name() == name)
        })
}

pub(crate) fn enclosing_record(g: &CpgGraph, mut n: NodeId) -> Option<NodeId> {
    while let Some(p) = g.ast_parent(n) {
        if g.node(p).has(Label::Record) {
            return Some(p);
        }
        n = p;
    }
    None
}

/// Transitive base records of `r` by `superClasses`, nearest first, without repeats.
pub(crate) fn ancestors(g: &CpgGraph, r: NodeId) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::new();
    let mut queue = vec![r];
    while let Some(cur) = queue.pop() {
        let bases: Vec<String> = match g.node(cur).prop("superClasses") {
            Some(Value::Array(a)) => a.iter().filter_map(|v| v.as_str().map(String::from)).collect(),
            _ => Vec::new(),
        };
        for b in bases.iter().rev() {
            let found = g.nodes_with(Label::Record).find(|&x| {
                x != r
                    && g.node(x).local_name() == b
                    && matches!(g.node(x).str_prop("kind"), Some("contract" | "library" | "interface"))
            });
            if let Some(x) = found {
                if !out.contains(&x) {
                    out.push(x);
                    queue.insert(0, x);
                }
            }
        }
    }
    out
}

/// Deep-copies the AST subtree at `root` with fresh ids. With `fill`, the first
/// placeholder maps to `fill` itself and later ones to fresh copies of it.
fn copy_with_substitution(g: &mut CpgGraph, root: NodeId, fill: Option<NodeId>) -> NodeId {
    let subtree = g.ast_subtree(root);
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    let mut used = false;
    for &n in &subtree {
        let node = g.node(n).clone();
        if node.has(Label::Placeholder) {
            if let Some(body) = fill {
                let target = if used {
                    copy_with_substitution(g, body, None)
                } else {
                    used = true;
                    body
                };
                map.insert(n, target);
                continue;
            }
        }
        let labels: Vec<Label> = node.labels.iter().collect();
        let id = g.add_node(&labels);
        g.node_mut(id).props = node.props;
        map.insert(n, id);
    }
    for &n in &subtree {
        if fill.is_some() && g.node(n).has(Label::Placeholder) {
            continue;
        }
        let out: Vec<CpgEdge> = g.out_edges(n).copied().collect();
        for e in out {
            g.push_edge(CpgEdge {
                from: map[&n],
                to: *map.get(&e.to).unwrap_or(&e.to),
                label: e.label,
                index: e.index,
            });
        }
    }
    map[&root]
}

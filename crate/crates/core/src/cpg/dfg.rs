//! Data-flow edges. Storage is flow-insensitive: a write to a field flows into
//! its declaration and every read flows out of it.

use super::graph::{CpgGraph, EdgeLabel, Label, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Access {
    Read,
    Write,
    ReadWrite,
}

const INC_DEC: &[&str] = &["++", "--"];

fn is_assign(op: &str) -> bool {
    op == "="
}

fn is_compound(op: &str) -> bool {
    op.len() >= 2 && op.ends_with('=') && !matches!(op, "==" | "!=" | "<=" | ">=")
}

fn access(g: &CpgGraph, n: NodeId) -> Access {
    let Some(p) = g.ast_parent(n) else { return Access::Read };
    let parent = g.node(p);
    let op = parent.str_prop("operatorCode").unwrap_or("");
    if parent.has(Label::BinaryOperator) && g.target(p, EdgeLabel::Lhs) == Some(n) {
        if is_assign(op) {
            return Access::Write;
        }
        if is_compound(op) {
            return Access::ReadWrite;
        }
    }
    if parent.has(Label::UnaryOperator) {
        if INC_DEC.contains(&op) {
            return Access::ReadWrite;
        }
        if op == "delete" {
            return Access::Write;
        }
    }
    if parent.has(Label::ExpressionList) {
        return access(g, p);
    }
    let is_base = g.target(p, EdgeLabel::Base) == Some(n) && parent.has(Label::Member)
        || g.target(p, EdgeLabel::ArrayExpression) == Some(n);
    if is_base && access(g, p) != Access::Read {
        return Access::ReadWrite;
    }
    Access::Read
}

pub(crate) fn pass_dfg(g: &mut CpgGraph) {
    let mut flows: Vec<(NodeId, NodeId)> = Vec::new();
    let push_dir = |flows: &mut Vec<(NodeId, NodeId)>, a: NodeId, b: NodeId, acc: Access| match acc {
        Access::Read => flows.push((a, b)),
        Access::Write => flows.push((b, a)),
        Access::ReadWrite => {
            flows.push((a, b));
            flows.push((b, a));
        }
    };
    let builtins: Vec<(String, NodeId)> = g
        .nodes_with(Label::Declaration)
        .filter(|&d| g.node(d).prop("builtin").is_some())
        .map(|d| (g.node(d).code().to_string(), d))
        .collect();

    for n in 0..g.node_count() as NodeId {
        let node = g.node(n);
        let one = |l: EdgeLabel| g.target(n, l);

        if node.has(Label::Reference) && !node.has(Label::Specified) {
            if let Some(d) = one(EdgeLabel::RefersTo) {
                push_dir(&mut flows, d, n, access(g, n));
            } else if let Some((_, d)) = builtins.iter().find(|(c, _)| c == node.code()) {
                flows.push((*d, n));
            }
            if node.has(Label::Member) {
                if let Some(b) = one(EdgeLabel::Base) {
                    push_dir(&mut flows, b, n, access(g, n));
                }
            }
        }
        if node.has(Label::Subscript) {
            if let Some(i) = one(EdgeLabel::SubscriptExpression) {
                flows.push((i, n));
            }
            if let Some(b) = one(EdgeLabel::ArrayExpression) {
                push_dir(&mut flows, b, n, access(g, n));
            }
        }
        if node.has(Label::BinaryOperator) {
            let op = node.str_prop("operatorCode").unwrap_or("");
            let (l, r) = (one(EdgeLabel::Lhs), one(EdgeLabel::Rhs));
            if is_assign(op) {
                if let Some(r) = r {
                    flows.push((r, n));
                }
                if let Some(l) = l {
                    flows.push((n, l));
                }
            } else {
                for x in [l, r].into_iter().flatten() {
                    flows.push((x, n));
                }
                if is_compound(op) {
                    if let Some(l) = l {
                        flows.push((n, l));
                    }
                }
            }
        }
        if node.has(Label::UnaryOperator) {
            if let Some(i) = one(EdgeLabel::Input) {
                let op = node.str_prop("operatorCode").unwrap_or("");
                if op != "delete" {
                    flows.push((i, n));
                }
                if INC_DEC.contains(&op) || op == "delete" {
                    flows.push((n, i));
                }
            }
        }
        if node.has(Label::ExpressionList) {
            for c in g.ast_children(n) {
                push_dir(&mut flows, c, n, access(g, n));
            }
        }
        if node.has(Label::Call) {
            let args = g.targets(n, EdgeLabel::Arguments);
            let targets = g.targets(n, EdgeLabel::Invokes);
            if targets.is_empty() {
                for &a in &args {
                    flows.push((a, n));
                }
            }
            for f in targets {
                let params = g.targets(f, EdgeLabel::Parameters);
                let offset = params.len().saturating_sub(args.len());
                if offset == 1 {
                    if let Some(b) = one(EdgeLabel::Base) {
                        flows.push((b, params[0]));
                    }
                }
                for (i, &a) in args.iter().enumerate() {
                    if let Some(&p) = params.get(i + offset) {
                        flows.push((a, p));
                    }
                }
            }
            for r in g.sources(n, EdgeLabel::Returns) {
                if g.node(r).has(Label::Return) {
                    flows.push((r, n));
                }
            }
            if let Some(c) = one(EdgeLabel::Callee) {
                if g.node(c).has(Label::Call) {
                    flows.push((c, n));
                }
            }
        }
        if node.has(Label::KeyValue) {
            if let Some(v) = one(EdgeLabel::Value) {
                flows.push((v, n));
            }
        }
        if node.has(Label::Specified) {
            for kv in g.targets(n, EdgeLabel::Specifiers) {
                flows.push((kv, n));
            }
            if let Some(b) = one(EdgeLabel::Base) {
                flows.push((b, n));
            }
        }
        if node.has(Label::Return) {
            if let Some(v) = one(EdgeLabel::ReturnValue) {
                flows.push((v, n));
            }
        }
        if node.has(Label::Conditional) {
            for c in g.ast_children(n) {
                flows.push((c, n));
            }
        } else if [Label::If, Label::While, Label::For, Label::Do]
            .iter()
            .any(|l| node.has(*l))
        {
            if let Some(c) = one(EdgeLabel::Condition) {
                flows.push((c, n));
            }
        }
        if node.has(Label::Variable) {
            if let Some(i) = one(EdgeLabel::Initializer) {
                flows.push((i, n));
            }
        }
    }
    for (a, b) in flows {
        g.ensure_edge(a, b, EdgeLabel::Dfg);
    }
}

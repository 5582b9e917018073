//! Reference resolution, call targets, inherited fields, builtins and types.

use std::collections::{BTreeMap, HashMap};

use super::graph::{CpgGraph, EdgeLabel, Label, NodeId};
use super::modifiers::{ancestors, enclosing_record};
use super::types::{builtin_type, element_type, is_elementary, type_local_name, LOW_LEVEL_MEMBERS};

/// Names whose members are chain-global builtins.
const BUILTIN_ROOTS: &[&str] = &["msg", "tx", "block"];

pub(crate) fn resolve(g: &mut CpgGraph) {
    inherit_fields(g);
    resolve_references(g);
    add_builtin_declarations(g);
    resolve_types(g);
    resolve_calls(g);
}

fn inherit_fields(g: &mut CpgGraph) {
    let records: Vec<NodeId> = g.nodes_with(Label::Record).collect();
    for r in records {
        for a in ancestors(g, r) {
            for f in g.targets(a, EdgeLabel::Fields) {
                g.ensure_edge(r, f, EdgeLabel::Fields);
            }
        }
    }
}

struct Scopes {
    frames: Vec<Vec<(String, NodeId)>>,
}

impl Scopes {
    fn lookup(&self, name: &str) -> Option<NodeId> {
        self.frames
            .iter()
            .rev()
            .find_map(|f| f.iter().rev().find(|(n, _)| n == name).map(|(_, id)| *id))
    }

    fn declare(&mut self, name: &str, id: NodeId) {
        if !name.is_empty() {
            self.frames.last_mut().expect("scope frame").push((name.to_string(), id));
        }
    }
}

fn resolve_references(g: &mut CpgGraph) {
    let mut links: Vec<(NodeId, NodeId)> = Vec::new();
    let records: Vec<NodeId> = g.nodes_with(Label::Record).collect();
    for r in records {
        let fields: Vec<(String, NodeId)> = g
            .targets(r, EdgeLabel::Fields)
            .into_iter()
            .map(|f| (g.node(f).local_name().to_string(), f))
            .collect();
        for member in g.ast_children(r) {
            let node = g.node(member);
            let mut scopes = Scopes {
                frames: vec![fields.clone()],
            };
            if node.has(Label::Field) {
                if let Some(init) = g.target(member, EdgeLabel::Initializer) {
                    walk(g, init, &mut scopes, &mut links);
                }
            } else if node.has(Label::Function) || node.has(Label::Modifier) {
                scopes.frames.push(Vec::new());
                for p in g.targets(member, EdgeLabel::Parameters) {
                    scopes.declare(g.node(p).local_name(), p);
                }
                for c in g.ast_children(member) {
                    if g.node(c).prop("isReturn").and_then(|v| v.as_bool()) == Some(true) {
                        scopes.declare(g.node(c).local_name(), c);
                    }
                }
                if let Some(b) = g.target(member, EdgeLabel::Body) {
                    walk(g, b, &mut scopes, &mut links);
                }
            }
        }
    }
    for (from, to) in links {
        g.ensure_edge(from, to, EdgeLabel::RefersTo);
    }
}

fn walk(g: &CpgGraph, n: NodeId, scopes: &mut Scopes, links: &mut Vec<(NodeId, NodeId)>) {
    let node = g.node(n);
    if node.has(Label::Block) || node.has(Label::For) {
        scopes.frames.push(Vec::new());
        for c in g.ast_children(n) {
            walk(g, c, scopes, links);
        }
        scopes.frames.pop();
    } else if node.has(Label::DeclarationStatement) {
        let decls = g.targets(n, EdgeLabel::Declarations);
        let mut seen_inits = Vec::new();
        for &d in &decls {
            if let Some(init) = g.target(d, EdgeLabel::Initializer) {
                if !seen_inits.contains(&init) {
                    walk(g, init, scopes, links);
                    seen_inits.push(init);
                }
            }
        }
        for d in decls {
            scopes.declare(g.node(d).local_name(), d);
        }
    } else if node.has(Label::Member) {
        if let Some(b) = g.target(n, EdgeLabel::Base) {
            walk(g, b, scopes, links);
        }
        for c in g.ast_children(n) {
            if Some(c) != g.target(n, EdgeLabel::Base) {
                walk(g, c, scopes, links);
            }
        }
    } else if node.has(Label::KeyValue) {
        if let Some(v) = g.target(n, EdgeLabel::Value) {
            walk(g, v, scopes, links);
        }
    } else if node.has(Label::Reference) {
        if let Some(d) = scopes.lookup(node.local_name()) {
            links.push((n, d));
        }
    } else {
        for c in g.ast_children(n) {
            walk(g, c, scopes, links);
        }
    }
}

fn builtin_code(g: &CpgGraph, n: NodeId) -> Option<String> {
    let node = g.node(n);
    if !node.has(Label::Reference) || g.target(n, EdgeLabel::RefersTo).is_some() {
        return None;
    }
    let code = node.code();
    if node.has(Label::Member) {
        let base = g.target(n, EdgeLabel::Base)?;
        let b = g.node(base);
        let root_ok = !b.has(Label::Member)
            && BUILTIN_ROOTS.contains(&b.local_name())
            && g.target(base, EdgeLabel::RefersTo).is_none();
        (root_ok && builtin_type(code).is_some()).then(|| code.to_string())
    } else if code == "now" {
        Some(code.to_string())
    } else {
        None
    }
}

/// One inferred declaration per distinct builtin (`msg.sender`, `now`, ...)
/// used in the graph; data flows from it to each use. Its local name is the
/// root object (`msg`, `tx`, `block`), as for an inferred `msg` declaration.
fn add_builtin_declarations(g: &mut CpgGraph) {
    let Some(&tu) = g.roots.first() else { return };
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();
    let uses: Vec<NodeId> = (0..g.node_count() as NodeId)
        .filter(|&n| builtin_code(g, n).is_some())
        .collect();
    for u in uses {
        let code = builtin_code(g, u).expect("filtered");
        seen.insert(code, ());
    }
    for code in seen.keys() {
        let id = g.add_node(&[Label::Declaration]);
        let local = code.split('.').next().unwrap_or(code);
        g.set_prop(id, "code", code.as_str());
        g.set_prop(id, "name", code.as_str());
        g.set_prop(id, "localName", local);
        g.set_prop(id, "isInferred", true);
        g.set_prop(id, "builtin", true);
        g.add_edge(tu, id, EdgeLabel::Ast);
    }
}

struct TypeTable {
    by_name: HashMap<String, NodeId>,
}

impl TypeTable {
    fn get(&mut self, g: &mut CpgGraph, name: &str) -> NodeId {
        if let Some(&t) = self.by_name.get(name) {
            return t;
        }
        let labels: &[Label] = if is_elementary(name) {
            &[Label::Type]
        } else {
            &[Label::Type, Label::ObjectType]
        };
        let id = g.add_node(labels);
        g.set_prop(id, "code", name);
        g.set_prop(id, "localName", type_local_name(name));
        g.set_prop(id, "name", type_local_name(name));
        g.set_prop(id, "isInferred", false);
        if let Some(&tu) = g.roots.first() {
            g.add_edge(tu, id, EdgeLabel::Ast);
        }
        self.by_name.insert(name.to_string(), id);
        id
    }
}

fn resolve_types(g: &mut CpgGraph) {
    let mut table = TypeTable {
        by_name: g
            .nodes_with(Label::Type)
            .map(|t| (g.node(t).code().to_string(), t))
            .collect(),
    };
    let record_names: HashMap<String, NodeId> = g
        .nodes_with(Label::Record)
        .filter(|&r| !g.node(r).is_inferred())
        .map(|r| (g.node(r).local_name().to_string(), r))
        .collect();

    // builtin declarations
    let builtins: Vec<NodeId> = g
        .nodes_with(Label::Declaration)
        .filter(|&d| g.node(d).prop("builtin").is_some())
        .collect();
    for d in builtins {
        let ty = builtin_type(g.node(d).code()).unwrap_or("UNKNOWN");
        let t = table.get(g, ty);
        g.add_edge(d, t, EdgeLabel::Type);
    }

    // expressions, bases before their users
    let Some(&tu) = g.roots.first() else { return };
    let order = post_order(g, tu);
    for n in order {
        let node = g.node(n);
        let typed = [
            Label::Reference,
            Label::Literal,
            Label::Call,
            Label::Subscript,
        ];
        if !typed.iter().any(|l| node.has(*l)) || g.target(n, EdgeLabel::Type).is_some() {
            continue;
        }
        let name = expression_type(g, n, &record_names);
        let t = table.get(g, &name);
        g.add_edge(n, t, EdgeLabel::Type);
    }

    let objects: Vec<NodeId> = g.nodes_with(Label::ObjectType).collect();
    for t in objects {
        let base = g.node(t).code().split('[').next().unwrap_or("").trim().to_string();
        let base = base.rsplit('.').next().unwrap_or(&base).to_string();
        if let Some(&r) = record_names.get(&base) {
            g.ensure_edge(t, r, EdgeLabel::RecordDeclaration);
        }
    }
}

fn type_of(g: &CpgGraph, n: NodeId) -> Option<String> {
    g.target(n, EdgeLabel::Type)
        .map(|t| g.node(t).code().to_string())
}

fn expression_type(g: &CpgGraph, n: NodeId, records: &HashMap<String, NodeId>) -> String {
    let node = g.node(n);
    let unknown = || "UNKNOWN".to_string();
    if let Some(ty) = builtin_code(g, n).and_then(|c| builtin_type(&c)) {
        return ty.to_string();
    }
    if node.has(Label::Literal) {
        return match node.str_prop("literalKind") {
            Some("bool") => "bool",
            Some("number") => "uint256",
            Some("address") => "address",
            _ => "string",
        }
        .to_string();
    }
    if node.has(Label::Member) {
        let base = g.target(n, EdgeLabel::Base);
        let local = node.local_name();
        if LOW_LEVEL_MEMBERS.contains(&local) {
            return base.and_then(|b| type_of(g, b)).unwrap_or_else(unknown);
        }
        if local == "balance" {
            return "uint256".into();
        }
        if local == "length" {
            return "uint256".into();
        }
        return unknown();
    }
    if node.has(Label::Reference) {
        if let Some(d) = g.target(n, EdgeLabel::RefersTo) {
            return type_of(g, d).unwrap_or_else(unknown);
        }
        if node.local_name() == "this" {
            if let Some(r) = enclosing_record(g, n) {
                let name = g.node(r).local_name();
                if !name.is_empty() {
                    return name.to_string();
                }
            }
        }
        return unknown();
    }
    if node.has(Label::Subscript) {
        return g
            .target(n, EdgeLabel::ArrayExpression)
            .and_then(|b| type_of(g, b))
            .and_then(|t| element_type(&t))
            .unwrap_or_else(unknown);
    }
    if node.has(Label::Call) {
        let Some(callee) = g.target(n, EdgeLabel::Callee) else { return unknown() };
        let c = g.node(callee);
        if c.has(Label::Reference) && !c.has(Label::Member) {
            let name = c.local_name();
            if name == "payable" || name == "address" {
                return "address".into();
            }
            if is_elementary(name) && !name.is_empty() && name != "UNKNOWN" {
                return name.to_string();
            }
            if records.contains_key(name) {
                return name.to_string();
            }
        }
        return unknown();
    }
    unknown()
}

/// AST post-order from `root`.
fn post_order(g: &CpgGraph, root: NodeId) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut stack = vec![(root, false)];
    while let Some((n, done)) = stack.pop() {
        if done {
            out.push(n);
            continue;
        }
        stack.push((n, true));
        for c in g.ast_children(n).into_iter().rev() {
            stack.push((c, false));
        }
    }
    out
}

fn resolve_calls(g: &mut CpgGraph) {
    let functions: Vec<NodeId> = g
        .nodes_with(Label::Function)
        .filter(|&f| !g.node(f).is_inferred() && !g.node(f).local_name().is_empty())
        .collect();
    let calls: Vec<NodeId> = g.nodes_with(Label::Call).collect();
    let mut invokes: Vec<(NodeId, NodeId)> = Vec::new();
    for c in calls {
        let name = g.node(c).local_name().to_string();
        if name.is_empty() {
            continue;
        }
        let args = g.targets(c, EdgeLabel::Arguments).len();
        let member_call = g.target(c, EdgeLabel::Base).is_some();
        if member_call {
            let base = g.target(c, EdgeLabel::Base).expect("base");
            let bt = type_of(g, base).unwrap_or_default();
            let builtin_base = builtin_code(g, base).is_some()
                || BUILTIN_ROOTS.contains(&g.node(base).local_name());
            if builtin_base || type_local_name(&bt) == "address" {
                continue;
            }
        }
        let arity_ok = |p: usize| p == args || (member_call && p == args + 1);
        let candidates: Vec<NodeId> = functions
            .iter()
            .copied()
            .filter(|&f| {
                g.node(f).local_name() == name && arity_ok(g.targets(f, EdgeLabel::Parameters).len())
            })
            .collect();
        if candidates.is_empty() {
            continue;
        }
        // prefer the caller's own record and its bases
        let preferred: Vec<NodeId> = enclosing_record(g, c)
            .map(|r| {
                let mut scope = vec![r];
                scope.extend(ancestors(g, r));
                scope
            })
            .map(|scope| {
                candidates
                    .iter()
                    .copied()
                    .filter(|&f| enclosing_record(g, f).is_some_and(|fr| scope.contains(&fr)))
                    .collect()
            })
            .unwrap_or_default();
        let chosen = if preferred.is_empty() || member_call {
            candidates
        } else {
            preferred
        };
        for f in chosen {
            invokes.push((c, f));
        }
    }
    for (c, f) in invokes {
        g.ensure_edge(c, f, EdgeLabel::Invokes);
        for r in returns_of(g, f) {
            g.ensure_edge(r, c, EdgeLabel::Returns);
        }
    }
}

/// Return statements of `f` plus its body block (the fall-through exit).
fn returns_of(g: &CpgGraph, f: NodeId) -> Vec<NodeId> {
    let Some(body) = g.target(f, EdgeLabel::Body) else { return Vec::new() };
    let mut out: Vec<NodeId> = g
        .ast_subtree(body)
        .into_iter()
        .filter(|&n| g.node(n).has(Label::Return))
        .collect();
    out.push(body);
    out
}

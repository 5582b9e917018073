//! Backtracking matcher.
//!
//! Chains are matched one after another. Each chain starts at its most
//! constrained node (a bound variable if any) and extends outward. Filter
//! conjuncts run as soon as every variable they mention is bound. Variable
//! length steps enumerate simple paths when the path is observable (a path
//! variable or an edge variable), and otherwise compute the reachable set by
//! breadth-first search, which yields the same end nodes.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::rc::Rc;
use std::time::Instant;

use serde_json::Value;

use super::pattern::{Chain, Cmp, Cond, Direction, NodePred, PathStep, Pattern, PropOp, PropTest};
use super::QueryError;
use crate::cpg::{CpgGraph, CpgNode, EdgeId, EdgeLabel, Label, LabelSet, NodeId};

/// Returned variables mapped to node ids.
pub type Binding = BTreeMap<String, NodeId>;

type Slot = usize;

#[derive(Debug, Clone)]
enum Val {
    Unbound,
    Node(NodeId),
    Edge(EdgeId),
    Path(Rc<Vec<NodeId>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Flow {
    Continue,
    Stop,
    Abort,
}

#[derive(Debug)]
struct CNode {
    slot: Option<Slot>,
    labels: LabelSet,
    any_labels: LabelSet,
    forbidden: LabelSet,
    props: Vec<PropTest>,
}

#[derive(Debug)]
struct CStep {
    slot: Option<Slot>,
    mask: u64,
    dir: Direction,
    min: u32,
    max: Option<u32>,
    forbid: Vec<(EdgeLabel, EdgeLabel)>,
}

#[derive(Debug)]
struct CChain {
    path: Option<Slot>,
    nodes: Vec<CNode>,
    steps: Vec<CStep>,
}

#[derive(Debug)]
enum CCond {
    True,
    And(Vec<CCond>),
    Or(Vec<CCond>),
    Not(Box<CCond>),
    Exists(Box<CPat>),
    Prop(Slot, PropTest),
    HasLabel(Slot, Label),
    InPath(Slot, Slot),
    Same(Slot, Slot),
    Differ(Slot, Slot),
    EdgeIndex(Slot, Cmp, Slot),
    PropsEqual(Slot, String, Slot, String),
}

#[derive(Debug)]
struct CConj {
    cond: CCond,
    deps: Vec<Slot>,
}

#[derive(Debug)]
struct CPat {
    chains: Vec<CChain>,
    conjuncts: Vec<CConj>,
}

/// A pattern resolved to variable slots, reusable across graphs.
#[derive(Debug)]
pub struct CompiledPattern {
    names: Vec<String>,
    root: CPat,
    returns: Vec<Slot>,
}

struct Compiler {
    slots: HashMap<String, Slot>,
    names: Vec<String>,
}

impl Compiler {
    fn slot(&mut self, name: &str) -> Slot {
        if let Some(&s) = self.slots.get(name) {
            return s;
        }
        let s = self.names.len();
        self.names.push(name.to_string());
        self.slots.insert(name.to_string(), s);
        s
    }

    fn lookup(&self, name: &str, scope: &HashSet<Slot>) -> Result<Slot, QueryError> {
        self.slots
            .get(name)
            .copied()
            .filter(|s| scope.contains(s))
            .ok_or_else(|| QueryError::UnknownVariable(name.to_string()))
    }

    fn node(&mut self, n: &super::pattern::NodePattern) -> CNode {
        let NodePred {
            labels,
            any_labels,
            forbidden,
            props,
        } = &n.pred;
        CNode {
            slot: n.var.as_deref().map(|v| self.slot(v)),
            labels: LabelSet::of(labels),
            any_labels: LabelSet::of(any_labels),
            forbidden: LabelSet::of(forbidden),
            props: props.clone(),
        }
    }

    fn step(&mut self, s: &PathStep) -> Result<CStep, QueryError> {
        if let Some(max) = s.max_hops {
            if max < s.min_hops {
                return Err(QueryError::Malformed(format!(
                    "step with min {} above max {max}",
                    s.min_hops
                )));
            }
        }
        if s.var.is_some() && s.is_variable() {
            return Err(QueryError::Malformed(
                "edge variables are only supported on single-hop steps".into(),
            ));
        }
        Ok(CStep {
            slot: s.var.as_deref().map(|v| self.slot(v)),
            mask: if s.labels.is_empty() {
                u64::MAX
            } else {
                s.labels.iter().fold(0, |m, l| m | (1u64 << *l as u32))
            },
            dir: s.dir,
            min: s.min_hops,
            max: s.max_hops,
            forbid: s.forbid_pairs.clone(),
        })
    }

    fn chain(&mut self, c: &Chain) -> Result<CChain, QueryError> {
        let mut nodes = vec![self.node(&c.start)];
        let mut steps = Vec::new();
        for h in &c.hops {
            steps.push(self.step(&h.step)?);
            nodes.push(self.node(&h.node));
        }
        Ok(CChain {
            path: c.path.as_deref().map(|p| self.slot(p)),
            nodes,
            steps,
        })
    }

    fn pattern(&mut self, p: &Pattern, outer: &HashSet<Slot>) -> Result<CPat, QueryError> {
        if p.chains.is_empty() {
            return Err(QueryError::Malformed("pattern without chains".into()));
        }
        let mut chains = Vec::new();
        for c in &p.chains {
            chains.push(self.chain(c)?);
        }
        let mut scope = outer.clone();
        let mut own = Vec::new();
        for v in p.chain_vars() {
            let s = self.slot(&v);
            if scope.insert(s) {
                own.push(s);
            }
        }
        let mut conjuncts = Vec::new();
        let parts: Vec<&Cond> = match &p.filter {
            Cond::And(v) => v.iter().collect(),
            Cond::True => Vec::new(),
            c => vec![c],
        };
        for part in parts {
            let cond = self.cond(part, &scope)?;
            let mut refs = Vec::new();
            collect_refs(&cond, &mut refs);
            let deps: Vec<Slot> = own.iter().copied().filter(|s| refs.contains(s)).collect();
            conjuncts.push(CConj { cond, deps });
        }
        Ok(CPat { chains, conjuncts })
    }

    fn cond(&mut self, c: &Cond, scope: &HashSet<Slot>) -> Result<CCond, QueryError> {
        Ok(match c {
            Cond::True => CCond::True,
            Cond::And(v) => CCond::And(v.iter().map(|c| self.cond(c, scope)).collect::<Result<_, _>>()?),
            Cond::Or(v) => CCond::Or(v.iter().map(|c| self.cond(c, scope)).collect::<Result<_, _>>()?),
            Cond::Not(c) => CCond::Not(Box::new(self.cond(c, scope)?)),
            Cond::Exists(p) => CCond::Exists(Box::new(self.pattern(p, scope)?)),
            Cond::Prop { var, test } => CCond::Prop(self.lookup(var, scope)?, test.clone()),
            Cond::HasLabel { var, label } => CCond::HasLabel(self.lookup(var, scope)?, *label),
            Cond::InPath { var, path } => CCond::InPath(self.lookup(var, scope)?, self.lookup(path, scope)?),
            Cond::Same { a, b } => CCond::Same(self.lookup(a, scope)?, self.lookup(b, scope)?),
            Cond::Differ { a, b } => CCond::Differ(self.lookup(a, scope)?, self.lookup(b, scope)?),
            Cond::EdgeIndex { a, cmp, b } => {
                CCond::EdgeIndex(self.lookup(a, scope)?, *cmp, self.lookup(b, scope)?)
            }
            Cond::PropsEqual { a, a_key, b, b_key } => CCond::PropsEqual(
                self.lookup(a, scope)?,
                a_key.clone(),
                self.lookup(b, scope)?,
                b_key.clone(),
            ),
        })
    }
}

/// Slots mentioned by a condition, including inside nested subpatterns.
fn collect_refs(c: &CCond, out: &mut Vec<Slot>) {
    match c {
        CCond::True => {}
        CCond::And(v) | CCond::Or(v) => v.iter().for_each(|c| collect_refs(c, out)),
        CCond::Not(c) => collect_refs(c, out),
        CCond::Exists(p) => {
            for ch in &p.chains {
                out.extend(ch.path);
                out.extend(ch.nodes.iter().filter_map(|n| n.slot));
                out.extend(ch.steps.iter().filter_map(|s| s.slot));
            }
            for cj in &p.conjuncts {
                collect_refs(&cj.cond, out);
            }
        }
        CCond::Prop(a, _) | CCond::HasLabel(a, _) => out.push(*a),
        CCond::InPath(a, b) | CCond::Same(a, b) | CCond::Differ(a, b) | CCond::EdgeIndex(a, _, b) => {
            out.push(*a);
            out.push(*b);
        }
        CCond::PropsEqual(a, _, b, _) => {
            out.push(*a);
            out.push(*b);
        }
    }
}

impl CompiledPattern {
    pub fn new(p: &Pattern) -> Result<Self, QueryError> {
        Self::with_outer(p, &[])
    }

    /// Compiles `p` with `outer` names treated as already bound.
    fn with_outer(p: &Pattern, outer: &[&str]) -> Result<Self, QueryError> {
        let mut c = Compiler {
            slots: HashMap::new(),
            names: Vec::new(),
        };
        let scope: HashSet<Slot> = outer.iter().map(|o| c.slot(o)).collect();
        let root = c.pattern(p, &scope)?;
        let mut all = scope.clone();
        for v in p.chain_vars() {
            all.insert(c.slot(&v));
        }
        let returns = p
            .returns
            .iter()
            .map(|r| c.lookup(r, &all))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(CompiledPattern {
            names: c.names,
            root,
            returns,
        })
    }

    pub fn variable_names(&self) -> &[String] {
        &self.names
    }
}

/// Result of one bounded search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Attempt {
    pub bindings: Vec<Binding>,
    pub timed_out: bool,
}

struct Ctx<'g> {
    g: &'g CpgGraph,
    slots: Vec<Val>,
    cap: Option<u32>,
    negation_depth: u32,
    deadline: Option<Instant>,
    ticks: u32,
    timed_out: bool,
    // top-level projection state
    returns: Vec<Slot>,
    seen: HashSet<Vec<NodeId>>,
    results: Vec<Vec<NodeId>>,
}

fn prop_value<'a>(node: &'a CpgNode, key: &str) -> Option<&'a Value> {
    node.props.get(key).filter(|v| !v.is_null())
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (as_number(a), as_number(b)) {
        (Some(x), Some(y)) if a.is_number() || b.is_number() => x == y,
        _ => a == b,
    }
}

pub(crate) fn prop_test(node: &CpgNode, t: &PropTest) -> bool {
    let v = prop_value(node, &t.key);
    match t.op {
        PropOp::IsNullOrEmpty => v.is_none_or(|v| v.as_str() == Some("")),
        PropOp::IsTrue => v.and_then(Value::as_bool) == Some(true),
        _ => {
            let Some(v) = v else { return false };
            match t.op {
                PropOp::Eq => values_equal(v, &t.value),
                PropOp::Ne => !values_equal(v, &t.value),
                PropOp::In => t
                    .value
                    .as_array()
                    .is_some_and(|a| a.iter().any(|x| values_equal(v, x))),
                PropOp::InUpper => {
                    let Some(s) = v.as_str() else { return false };
                    let up = s.to_uppercase();
                    t.value
                        .as_array()
                        .is_some_and(|a| a.iter().any(|x| x.as_str().is_some_and(|x| x.to_uppercase() == up)))
                }
                PropOp::Contains => match (v.as_str(), t.value.as_str()) {
                    (Some(s), Some(sub)) => s.contains(sub),
                    _ => false,
                },
                PropOp::HeaderContains => match (v.as_str(), t.value.as_str()) {
                    (Some(s), Some(sub)) => s.split('{').next().unwrap_or("").contains(sub),
                    _ => false,
                },
                PropOp::Lt | PropOp::Le | PropOp::Gt | PropOp::Ge => {
                    let (Some(a), Some(b)) = (as_number(v), as_number(&t.value)) else {
                        return false;
                    };
                    let cmp = match t.op {
                        PropOp::Lt => Cmp::Lt,
                        PropOp::Le => Cmp::Le,
                        PropOp::Gt => Cmp::Gt,
                        _ => Cmp::Ge,
                    };
                    cmp.holds(a, b)
                }
                PropOp::IsNullOrEmpty | PropOp::IsTrue => unreachable!(),
            }
        }
    }
}

fn node_ok(node: &CpgNode, c: &CNode) -> bool {
    node.labels.is_superset(c.labels)
        && (c.any_labels.is_empty() || node.labels.intersects(c.any_labels))
        && !node.labels.intersects(c.forbidden)
        && c.props.iter().all(|t| prop_test(node, t))
}

fn flip(d: Direction) -> Direction {
    match d {
        Direction::Out => Direction::In,
        Direction::In => Direction::Out,
        Direction::Either => Direction::Either,
    }
}

/// Anchor position of a chain: a bound variable if any, else the most
/// selective predicate.
fn anchor(ctx: &Ctx, chain: &CChain) -> usize {
    let score = |n: &CNode| {
        if n.slot.is_some_and(|s| !matches!(ctx.slots[s], Val::Unbound)) {
            0
        } else if n.props.iter().any(|t| t.op == PropOp::Eq || t.op == PropOp::In) {
            1
        } else if !n.labels.is_empty() || !n.any_labels.is_empty() {
            2
        } else {
            3
        }
    };
    (0..chain.nodes.len())
        .min_by_key(|&i| (score(&chain.nodes[i]), i))
        .unwrap_or(0)
}

/// One traversal in binding order: from position `from` to `to` over step `step`.
#[derive(Clone, Copy)]
struct Move {
    step: usize,
    from: usize,
    to: usize,
    reversed: bool,
}

struct ChainState {
    positions: Vec<Option<NodeId>>,
    /// Node sequence of each step in chain order, when the path is observed.
    segments: Vec<Vec<NodeId>>,
}

impl<'g> Ctx<'g> {
    fn tick(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(256) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        self.timed_out
    }

    fn bound(&self, s: Slot) -> bool {
        !matches!(self.slots[s], Val::Unbound)
    }

    fn node_of(&self, s: Slot) -> Option<NodeId> {
        match self.slots[s] {
            Val::Node(n) => Some(n),
            _ => None,
        }
    }

    /// Runs `p`, calling `k` for each complete match.
    fn run(&mut self, p: &CPat, top: bool, k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow) -> Flow {
        let mut done = vec![false; p.conjuncts.len()];
        let marked = match self.check_ready(p, &mut done) {
            Err(f) => return f,
            Ok(None) => return Flow::Continue,
            Ok(Some(m)) => m,
        };
        let f = self.chains(p, 0, &mut done, top, k);
        for i in marked {
            done[i] = false;
        }
        f
    }

    /// Evaluates conjuncts whose variables are now bound. `Ok(None)` means one failed.
    fn check_ready(&mut self, p: &CPat, done: &mut [bool]) -> Result<Option<Vec<usize>>, Flow> {
        let mut marked = Vec::new();
        for (i, cj) in p.conjuncts.iter().enumerate() {
            if done[i] || !cj.deps.iter().all(|&s| self.bound(s)) {
                continue;
            }
            match self.eval(&cj.cond) {
                Err(f) => {
                    for m in marked {
                        done[m] = false;
                    }
                    return Err(f);
                }
                Ok(false) => {
                    for m in marked {
                        done[m] = false;
                    }
                    return Ok(None);
                }
                Ok(true) => {
                    done[i] = true;
                    marked.push(i);
                }
            }
        }
        Ok(Some(marked))
    }

    fn projection_seen(&self, top: bool) -> bool {
        if !top || self.returns.is_empty() || !self.returns.iter().all(|&s| self.bound(s)) {
            return false;
        }
        let key: Vec<NodeId> = self.returns.iter().map(|&s| self.node_of(s).unwrap_or(u32::MAX)).collect();
        self.seen.contains(&key)
    }

    fn chains(
        &mut self,
        p: &CPat,
        ci: usize,
        done: &mut Vec<bool>,
        top: bool,
        k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow,
    ) -> Flow {
        if ci == p.chains.len() {
            if done.iter().all(|d| *d) {
                return k(self);
            }
            // conjuncts without bindable dependencies were already evaluated
            return match self.check_ready(p, done) {
                Err(f) => f,
                Ok(None) => Flow::Continue,
                Ok(Some(m)) => {
                    let f = if done.iter().all(|d| *d) { k(self) } else { Flow::Continue };
                    for i in m {
                        done[i] = false;
                    }
                    f
                }
            };
        }
        let chain = &p.chains[ci];
        let a = anchor(self, chain);
        let mut moves = Vec::new();
        for s in a..chain.steps.len() {
            moves.push(Move { step: s, from: s, to: s + 1, reversed: false });
        }
        for s in (0..a).rev() {
            moves.push(Move { step: s, from: s + 1, to: s, reversed: true });
        }
        let mut st = ChainState {
            positions: vec![None; chain.nodes.len()],
            segments: vec![Vec::new(); chain.steps.len()],
        };
        let candidates: Vec<NodeId> = match chain.nodes[a].slot.and_then(|s| self.node_of(s)) {
            Some(n) => vec![n],
            None => {
                if chain.nodes[a].slot.is_some_and(|s| self.bound(s)) {
                    return Flow::Continue;
                }
                let g = self.g;
                g.nodes().iter().filter(|n| node_ok(n, &chain.nodes[a])).map(|n| n.id).collect()
            }
        };
        for n in candidates {
            if self.tick() {
                return Flow::Abort;
            }
            let f = self.place(p, ci, chain, &moves, 0, a, n, &mut st, done, top, k);
            if f != Flow::Continue {
                return f;
            }
            if self.projection_seen(top) {
                break;
            }
        }
        Flow::Continue
    }

    /// Binds position `pos` to `n` and continues with move `mi`.
    #[allow(clippy::too_many_arguments)]
    fn place(
        &mut self,
        p: &CPat,
        ci: usize,
        chain: &CChain,
        moves: &[Move],
        mi: usize,
        pos: usize,
        n: NodeId,
        st: &mut ChainState,
        done: &mut Vec<bool>,
        top: bool,
        k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow,
    ) -> Flow {
        let cn = &chain.nodes[pos];
        if !node_ok(self.g.node(n), cn) {
            return Flow::Continue;
        }
        let mut newly_bound = None;
        if let Some(s) = cn.slot {
            match self.slots[s] {
                Val::Node(b) if b != n => return Flow::Continue,
                Val::Node(_) => {}
                Val::Unbound => {
                    self.slots[s] = Val::Node(n);
                    newly_bound = Some(s);
                }
                _ => return Flow::Continue,
            }
        }
        st.positions[pos] = Some(n);
        let f = if self.projection_seen(top) {
            Flow::Continue
        } else {
            match self.check_ready(p, done) {
                Err(f) => f,
                Ok(None) => Flow::Continue,
                Ok(Some(marked)) => {
                    let f = self.advance(p, ci, chain, moves, mi, st, done, top, k);
                    for i in marked {
                        done[i] = false;
                    }
                    f
                }
            }
        };
        st.positions[pos] = None;
        if let Some(s) = newly_bound {
            self.slots[s] = Val::Unbound;
        }
        f
    }

    #[allow(clippy::too_many_arguments)]
    fn advance(
        &mut self,
        p: &CPat,
        ci: usize,
        chain: &CChain,
        moves: &[Move],
        mi: usize,
        st: &mut ChainState,
        done: &mut Vec<bool>,
        top: bool,
        k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow,
    ) -> Flow {
        if mi == moves.len() {
            let mut path_bound = None;
            if let Some(ps) = chain.path {
                let mut nodes = vec![st.positions[0].expect("chain start placed")];
                for seg in &st.segments {
                    nodes.extend_from_slice(&seg[1..]);
                }
                match &self.slots[ps] {
                    Val::Unbound => {
                        self.slots[ps] = Val::Path(Rc::new(nodes));
                        path_bound = Some(ps);
                    }
                    Val::Path(existing) if **existing == nodes => {}
                    _ => return Flow::Continue,
                }
            }
            let f = match self.check_ready(p, done) {
                Err(f) => f,
                Ok(None) => Flow::Continue,
                Ok(Some(marked)) => {
                    let f = self.chains(p, ci + 1, done, top, k);
                    for i in marked {
                        done[i] = false;
                    }
                    f
                }
            };
            if let Some(ps) = path_bound {
                self.slots[ps] = Val::Unbound;
            }
            return f;
        }
        let mv = moves[mi];
        let step = &chain.steps[mv.step];
        let dir = if mv.reversed { flip(step.dir) } else { step.dir };
        let from = st.positions[mv.from].expect("move starts at a placed node");
        let cap = if self.negation_depth > 0 { None } else { self.cap };
        let max = match (step.max, cap) {
            (Some(m), Some(c)) => Some(m.min(c).max(step.min)),
            (Some(m), None) => Some(m),
            (None, c) => c.map(|c| c.max(step.min)),
        };
        let observe_path = chain.path.is_some();

        if step.slot.is_some() || (observe_path && step.max != Some(1)) || step.min > 1 {
            return self.walk_paths(p, ci, chain, moves, mi, mv, step, dir, from, max, st, done, top, k);
        }
        if step.min == 1 && max == Some(1) {
            let g = self.g;
            for e in incident(g, from, dir).iter() {
                let edge = g.edge(*e);
                if step.mask & (1u64 << edge.label as u32) == 0 {
                    continue;
                }
                let other = if edge.from == from && dir != Direction::In { edge.to } else { edge.from };
                if self.tick() {
                    return Flow::Abort;
                }
                st.segments[mv.step] = if mv.reversed { vec![other, from] } else { vec![from, other] };
                let f = self.place(p, ci, chain, moves, mi + 1, mv.to, other, st, done, top, k);
                if f != Flow::Continue {
                    return f;
                }
                if self.projection_seen(top) {
                    break;
                }
            }
            return Flow::Continue;
        }
        // reachable set
        let ends = match self.reachable(from, step, dir, max) {
            Some(e) => e,
            None => return Flow::Abort,
        };
        for other in ends {
            st.segments[mv.step] = if mv.reversed { vec![other, from] } else { vec![from, other] };
            let f = self.place(p, ci, chain, moves, mi + 1, mv.to, other, st, done, top, k);
            if f != Flow::Continue {
                return f;
            }
            if self.projection_seen(top) {
                break;
            }
        }
        Flow::Continue
    }

    /// End nodes of paths from `from` with hop count in `[step.min, max]`
    /// (`step.min` is 0 or 1 here). Without forbidden pairs this equals the
    /// simple-path end set; with them the search runs over (node, last label)
    /// states. `None` on timeout.
    fn reachable(&mut self, from: NodeId, step: &CStep, dir: Direction, max: Option<u32>) -> Option<Vec<NodeId>> {
        let g = self.g;
        let mut out = Vec::new();
        if step.min == 0 {
            out.push(from);
        }
        let mut emitted = vec![false; g.node_count()];
        emitted[from as usize] = true;
        let mut seen: HashSet<(NodeId, Option<EdgeLabel>)> = HashSet::from([(from, None)]);
        let mut queue = VecDeque::from([(from, None::<EdgeLabel>, 0u32)]);
        while let Some((n, last, d)) = queue.pop_front() {
            if max.is_some_and(|m| d >= m) {
                continue;
            }
            for e in incident(g, n, dir).iter() {
                if self.tick() {
                    return None;
                }
                let edge = g.edge(*e);
                if step.mask & (1u64 << edge.label as u32) == 0 {
                    continue;
                }
                if let Some(l) = last {
                    if step.forbid.iter().any(|&(a, b)| a == l && b == edge.label) {
                        continue;
                    }
                }
                let other = if edge.from == n && dir != Direction::In { edge.to } else { edge.from };
                let state = (other, (!step.forbid.is_empty()).then_some(edge.label));
                if other == from || !seen.insert(state) {
                    continue;
                }
                if !emitted[other as usize] {
                    emitted[other as usize] = true;
                    out.push(other);
                }
                queue.push_back((other, state.1, d + 1));
            }
        }
        Some(out)
    }

    /// Depth-first enumeration of simple paths for steps whose path matters.
    #[allow(clippy::too_many_arguments)]
    fn walk_paths(
        &mut self,
        p: &CPat,
        ci: usize,
        chain: &CChain,
        moves: &[Move],
        mi: usize,
        mv: Move,
        step: &CStep,
        dir: Direction,
        from: NodeId,
        max: Option<u32>,
        st: &mut ChainState,
        done: &mut Vec<bool>,
        top: bool,
        k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow,
    ) -> Flow {
        let g = self.g;
        // (node, next incident edge index, label of the edge into node, edge into node)
        let mut stack: Vec<(NodeId, usize, Option<EdgeLabel>, Option<EdgeId>)> = vec![(from, 0, None, None)];
        let mut on_path: HashSet<NodeId> = HashSet::from([from]);
        let emit = |ctx: &mut Self,
                    stack: &[(NodeId, usize, Option<EdgeLabel>, Option<EdgeId>)],
                    st: &mut ChainState,
                    done: &mut Vec<bool>,
                    k: &mut dyn FnMut(&mut Ctx<'g>) -> Flow|
         -> Flow {
            let end = stack.last().expect("non-empty").0;
            let mut seg: Vec<NodeId> = stack.iter().map(|s| s.0).collect();
            if mv.reversed {
                seg.reverse();
            }
            st.segments[mv.step] = seg;
            let mut bound_edge = None;
            if let Some(es) = step.slot {
                let e = stack.last().and_then(|s| s.3).expect("single-hop edge");
                match ctx.slots[es] {
                    Val::Unbound => {
                        ctx.slots[es] = Val::Edge(e);
                        bound_edge = Some(es);
                    }
                    Val::Edge(b) if b == e => {}
                    _ => return Flow::Continue,
                }
            }
            let f = ctx.place(p, ci, chain, moves, mi + 1, mv.to, end, st, done, top, k);
            if let Some(es) = bound_edge {
                ctx.slots[es] = Val::Unbound;
            }
            f
        };
        if step.min == 0 {
            let f = emit(self, &stack, st, done, k);
            if f != Flow::Continue {
                return f;
            }
        }
        while let Some(&(n, idx, last, _)) = stack.last() {
            if self.tick() {
                return Flow::Abort;
            }
            let depth = (stack.len() - 1) as u32;
            let inc = incident(g, n, dir);
            if max.is_some_and(|m| depth >= m) || idx >= inc.len() {
                stack.pop();
                on_path.remove(&n);
                continue;
            }
            stack.last_mut().expect("non-empty").1 += 1;
            let e = inc[idx];
            let edge = g.edge(e);
            if step.mask & (1u64 << edge.label as u32) == 0 {
                continue;
            }
            if let Some(l) = last {
                if step.forbid.iter().any(|&(a, b)| a == l && b == edge.label) {
                    continue;
                }
            }
            let other = if edge.from == n && dir != Direction::In { edge.to } else { edge.from };
            if on_path.contains(&other) {
                continue;
            }
            stack.push((other, 0, Some(edge.label), Some(e)));
            on_path.insert(other);
            if depth + 1 >= step.min {
                let f = emit(self, &stack, st, done, k);
                if f != Flow::Continue {
                    return f;
                }
                if self.projection_seen(top) {
                    break;
                }
            }
        }
        Flow::Continue
    }

    fn eval(&mut self, c: &CCond) -> Result<bool, Flow> {
        Ok(match c {
            CCond::True => true,
            CCond::And(v) => {
                for c in v {
                    if !self.eval(c)? {
                        return Ok(false);
                    }
                }
                true
            }
            CCond::Or(v) => {
                for c in v {
                    if self.eval(c)? {
                        return Ok(true);
                    }
                }
                false
            }
            CCond::Not(c) => {
                self.negation_depth += 1;
                let r = self.eval(c);
                self.negation_depth -= 1;
                !r?
            }
            CCond::Exists(p) => match self.run(p, false, &mut |_| Flow::Stop) {
                Flow::Stop => true,
                Flow::Continue => false,
                Flow::Abort => return Err(Flow::Abort),
            },
            CCond::Prop(s, t) => self.node_of(*s).is_some_and(|n| prop_test(self.g.node(n), t)),
            CCond::HasLabel(s, l) => self.node_of(*s).is_some_and(|n| self.g.node(n).has(*l)),
            CCond::InPath(s, ps) => match (&self.slots[*s], &self.slots[*ps]) {
                (Val::Node(n), Val::Path(p)) => p.contains(n),
                _ => false,
            },
            CCond::Same(a, b) => same(&self.slots[*a], &self.slots[*b]),
            CCond::Differ(a, b) => {
                !matches!(self.slots[*a], Val::Unbound)
                    && !matches!(self.slots[*b], Val::Unbound)
                    && !same(&self.slots[*a], &self.slots[*b])
            }
            CCond::EdgeIndex(a, cmp, b) => match (&self.slots[*a], &self.slots[*b]) {
                (Val::Edge(x), Val::Edge(y)) => {
                    match (self.g.edge(*x).index, self.g.edge(*y).index) {
                        (Some(i), Some(j)) => cmp.holds(i as f64, j as f64),
                        _ => false,
                    }
                }
                _ => false,
            },
            CCond::PropsEqual(a, ak, b, bk) => match (self.node_of(*a), self.node_of(*b)) {
                (Some(x), Some(y)) => {
                    match (prop_value(self.g.node(x), ak), prop_value(self.g.node(y), bk)) {
                        (Some(u), Some(v)) => values_equal(u, v),
                        _ => false,
                    }
                }
                _ => false,
            },
        })
    }
}

fn same(a: &Val, b: &Val) -> bool {
    match (a, b) {
        (Val::Node(x), Val::Node(y)) => x == y,
        (Val::Edge(x), Val::Edge(y)) => x == y,
        (Val::Path(x), Val::Path(y)) => x == y,
        _ => false,
    }
}

fn incident(g: &CpgGraph, n: NodeId, dir: Direction) -> std::borrow::Cow<'_, [EdgeId]> {
    match dir {
        Direction::Out => std::borrow::Cow::Borrowed(g.out_edge_ids(n)),
        Direction::In => std::borrow::Cow::Borrowed(g.in_edge_ids(n)),
        Direction::Either => {
            let mut v = g.out_edge_ids(n).to_vec();
            v.extend_from_slice(g.in_edge_ids(n));
            std::borrow::Cow::Owned(v)
        }
    }
}

/// Runs one search with hop cap `cap` and an optional deadline.
pub(crate) fn search(
    g: &CpgGraph,
    cp: &CompiledPattern,
    preset: &[(Slot, NodeId)],
    cap: Option<u32>,
    deadline: Option<Instant>,
    first_only: bool,
) -> Attempt {
    let mut ctx = Ctx {
        g,
        slots: vec![Val::Unbound; cp.names.len()],
        cap,
        negation_depth: 0,
        deadline,
        ticks: 0,
        timed_out: false,
        returns: cp.returns.clone(),
        seen: HashSet::new(),
        results: Vec::new(),
    };
    for &(s, n) in preset {
        ctx.slots[s] = Val::Node(n);
    }
    if g.node_count() == 0 {
        return Attempt {
            bindings: Vec::new(),
            timed_out: false,
        };
    }
    let mut k = |ctx: &mut Ctx| {
        let key: Vec<NodeId> = ctx
            .returns
            .iter()
            .map(|&s| ctx.node_of(s).unwrap_or(u32::MAX))
            .collect();
        if ctx.seen.insert(key.clone()) {
            ctx.results.push(key);
        }
        if first_only {
            Flow::Stop
        } else {
            Flow::Continue
        }
    };
    let root = &cp.root;
    let flow = ctx.run(root, true, &mut k);
    let timed_out = flow == Flow::Abort || ctx.timed_out;
    let results = std::mem::take(&mut ctx.results);
    let mut bindings: Vec<Binding> = results
        .into_iter()
        .map(|key| {
            cp.returns
                .iter()
                .zip(key)
                .map(|(&s, n)| (cp.names[s].clone(), n))
                .collect()
        })
        .collect();
    bindings.sort();
    Attempt { bindings, timed_out }
}

impl CompiledPattern {
    /// Compiles `sub` for evaluation under an outer binding.
    pub(crate) fn for_binding(sub: &Pattern, binding: &Binding) -> Result<(Self, Vec<(Slot, NodeId)>), QueryError> {
        let names: Vec<&str> = binding.keys().map(String::as_str).collect();
        let cp = Self::with_outer(sub, &names)?;
        let preset = binding
            .iter()
            .map(|(k, &v)| (cp.names.iter().position(|n| n == k).expect("outer slot"), v))
            .collect();
        Ok((cp, preset))
    }
}

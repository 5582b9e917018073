//! Random graphs and patterns, and a brute-force matcher: every tuple of
//! node variables is tried, and every step is checked by enumerating simple
//! paths.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sodd::cpg::{CpgGraph, EdgeLabel, Label, NodeId};
use sodd::graphquery::pattern::*;
use sodd::graphquery::{Cond, PropOp};

pub const LABELS: [Label; 3] = [Label::Call, Label::Reference, Label::Literal];
pub const EDGES: [EdgeLabel; 3] = [EdgeLabel::Eog, EdgeLabel::Dfg, EdgeLabel::Ast];
pub const CODES: [&str; 3] = ["a", "b", "c"];

pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize) -> CpgGraph {
    let n = rng.random_range(0..=max_nodes);
    let mut g = CpgGraph::new();
    for _ in 0..n {
        let id = g.add_node(&[*LABELS.choose(rng).unwrap()]);
        g.set_prop(id, "code", *CODES.choose(rng).unwrap());
    }
    if n >= 2 {
        let m = n + rng.random_range(0..=n / 2);
        for _ in 0..m {
            let a = rng.random_range(0..n) as NodeId;
            let b = rng.random_range(0..n) as NodeId;
            if a != b {
                g.add_edge(a, b, *EDGES.choose(rng).unwrap());
            }
        }
    }
    g
}

pub fn random_node(rng: &mut ChaCha8Rng, vars: &[&str]) -> NodePattern {
    let mut n = if rng.random_bool(0.65) { node(vars.choose(rng).unwrap()) } else { anon() };
    if rng.random_bool(0.4) {
        n = n.label(*LABELS.choose(rng).unwrap());
    }
    if rng.random_bool(0.2) {
        n = n.eq("code", *CODES.choose(rng).unwrap());
    }
    n
}

pub fn random_step(rng: &mut ChaCha8Rng) -> PathStep {
    let dir = *[Direction::Out, Direction::In, Direction::Either].choose(rng).unwrap();
    let mut labels: Vec<EdgeLabel> = EDGES.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    if labels.is_empty() {
        labels.push(*EDGES.choose(rng).unwrap());
    }
    let (min, max) = *[(1, Some(1)), (1, None), (0, Some(2)), (2, Some(3)), (1, Some(2)), (0, None)]
        .choose(rng)
        .unwrap();
    PathStep::new(dir, &labels).hops(min, max)
}

pub fn random_pattern(rng: &mut ChaCha8Rng) -> Pattern {
    let vars = ["x", "y", "z"];
    let mut p = Pattern::new();
    let mut steps_left = 3;
    let chains = rng.random_range(1..=2);
    for ci in 0..chains {
        let mut b = ChainBuilder::from(random_node(rng, &vars));
        let k = if ci + 1 == chains { steps_left } else { rng.random_range(0..=steps_left) };
        let k = rng.random_range(0..=k);
        for _ in 0..k {
            b = b.step(random_step(rng)).to(random_node(rng, &vars));
        }
        steps_left -= k;
        p = p.chain(b);
    }
    let mut declared = p.chain_vars();
    if declared.is_empty() {
        p.chains[0].start.var = Some("x".into());
        declared.push("x".into());
    }
    let pick = |rng: &mut ChaCha8Rng| declared.choose(rng).unwrap().clone();
    let mut conds = Vec::new();
    if rng.random_bool(0.3) {
        conds.push(prop(&pick(rng), "code", PropOp::Eq, *CODES.choose(rng).unwrap()));
    }
    if rng.random_bool(0.3) {
        conds.push(differ(&pick(rng), &pick(rng)));
    }
    if rng.random_bool(0.4) {
        let from = pick(rng);
        let sub = Pattern::new().chain(node(&from).step(random_step(rng)).to(random_node(rng, &["w", &from])));
        conds.push(if rng.random_bool(0.5) { not(exists(sub)) } else { exists(sub) });
    }
    if conds.len() >= 2 && rng.random_bool(0.5) {
        p = p.filter(or(conds));
    } else {
        for c in conds {
            p = p.filter(c);
        }
    }
    let mut returns: Vec<String> = declared.iter().filter(|_| rng.random_bool(0.7)).cloned().collect();
    if returns.is_empty() {
        returns.push(declared[0].clone());
    }
    p.returns = returns;
    p
}

pub struct Oracle<'g> {
    g: &'g CpgGraph,
    ends: HashMap<(NodeId, String), BTreeSet<NodeId>>,
}

impl Oracle<'_> {
    fn node_ok(&self, id: NodeId, n: &NodePattern) -> bool {
        let node = self.g.node(id);
        n.pred.labels.iter().all(|l| node.labels.contains(*l))
            && n.pred.props.iter().all(|t| {
                assert_eq!(t.op, PropOp::Eq);
                node.props.get(&t.key) == Some(&t.value)
            })
    }

    fn neighbours(&self, n: NodeId, s: &PathStep) -> Vec<NodeId> {
        let mut out = Vec::new();
        for e in self.g.edges() {
            if !s.labels.contains(&e.label) {
                continue;
            }
            if e.from == n && matches!(s.dir, Direction::Out | Direction::Either) {
                out.push(e.to);
            }
            if e.to == n && matches!(s.dir, Direction::In | Direction::Either) {
                out.push(e.from);
            }
        }
        out
    }

    /// Every node that ends a simple path from `a` with an admissible length.
    fn reach(&mut self, a: NodeId, s: &PathStep) -> BTreeSet<NodeId> {
        let key = (a, format!("{s:?}"));
        if let Some(r) = self.ends.get(&key) {
            return r.clone();
        }
        let mut found = BTreeSet::new();
        let mut path = vec![a];
        self.dfs(&mut path, s, &mut found);
        self.ends.insert(key, found.clone());
        found
    }

    fn dfs(&self, path: &mut Vec<NodeId>, s: &PathStep, found: &mut BTreeSet<NodeId>) {
        let len = path.len() as u32 - 1;
        if len >= s.min_hops && s.max_hops.is_none_or(|m| len <= m) {
            found.insert(*path.last().unwrap());
        }
        if s.max_hops.is_some_and(|m| len >= m) {
            return;
        }
        for nb in self.neighbours(*path.last().unwrap(), s) {
            if !path.contains(&nb) {
                path.push(nb);
                self.dfs(path, s, found);
                path.pop();
            }
        }
    }

    fn chain_holds(&mut self, c: &Chain, env: &HashMap<String, NodeId>) -> bool {
        let mut nodes = vec![&c.start];
        let mut steps = Vec::new();
        for h in &c.hops {
            steps.push(&h.step);
            nodes.push(&h.node);
        }
        let candidates = |o: &Self, n: &NodePattern| -> Vec<NodeId> {
            let all: Vec<NodeId> = match &n.var {
                Some(v) => vec![env[v]],
                None => (0..o.g.node_count() as NodeId).collect(),
            };
            all.into_iter().filter(|&id| o.node_ok(id, n)).collect()
        };
        let mut frontier: BTreeSet<NodeId> = candidates(self, nodes[0]).into_iter().collect();
        for (i, s) in steps.iter().enumerate() {
            let allowed: BTreeSet<NodeId> = candidates(self, nodes[i + 1]).into_iter().collect();
            let mut next = BTreeSet::new();
            for a in frontier {
                next.extend(self.reach(a, s).intersection(&allowed));
            }
            frontier = next;
        }
        !frontier.is_empty()
    }

    fn eval(&mut self, c: &Cond, env: &HashMap<String, NodeId>) -> bool {
        match c {
            Cond::True => true,
            Cond::And(v) => v.iter().all(|c| self.eval(c, env)),
            Cond::Or(v) => v.iter().any(|c| self.eval(c, env)),
            Cond::Not(c) => !self.eval(c, env),
            Cond::Exists(p) => !self.solutions(p, env).is_empty(),
            Cond::Prop { var, test } => self.g.node(env[var]).props.get(&test.key) == Some(&test.value),
            Cond::Differ { a, b } => env[a] != env[b],
            other => panic!("oracle does not model {other:?}"),
        }
    }

    fn solutions(&mut self, p: &Pattern, outer: &HashMap<String, NodeId>) -> Vec<HashMap<String, NodeId>> {
        let vars: Vec<String> = p.chain_vars().into_iter().filter(|v| !outer.contains_key(v)).collect();
        let n = self.g.node_count() as NodeId;
        let mut out = Vec::new();
        let mut tuple = vec![0; vars.len()];
        if n == 0 {
            return out;
        }
        loop {
            let mut env = outer.clone();
            for (v, &t) in vars.iter().zip(&tuple) {
                env.insert(v.clone(), t);
            }
            if p.chains.iter().all(|c| self.chain_holds(c, &env)) && self.eval(&p.filter, &env) {
                out.push(env);
            }
            let mut i = 0;
            loop {
                if i == tuple.len() {
                    return out;
                }
                tuple[i] += 1;
                if tuple[i] < n {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
        }
    }
}

pub fn oracle_bindings(g: &CpgGraph, p: &Pattern) -> Vec<BTreeMap<String, NodeId>> {
    let mut o = Oracle { g, ends: HashMap::new() };
    let set: BTreeSet<BTreeMap<String, NodeId>> = o
        .solutions(p, &HashMap::new())
        .into_iter()
        .map(|env| p.returns.iter().map(|r| (r.clone(), env[r])).collect())
        .collect();
    set.into_iter().collect()
}

pub fn deep_chain(len: u32) -> CpgGraph {
    // diamonds in series: 2^len distinct paths from node 0 to the last node
    let mut g = CpgGraph::new();
    let first = g.add_node(&[Label::Param]);
    let mut prev = first;
    for _ in 0..len {
        let up = g.add_node(&[Label::Reference]);
        let down = g.add_node(&[Label::Reference]);
        let join = g.add_node(&[Label::Reference]);
        for (a, b) in [(prev, up), (prev, down), (up, join), (down, join)] {
            g.add_edge(a, b, EdgeLabel::Dfg);
        }
        prev = join;
    }
    let sink = g.add_node(&[Label::Field]);
    g.add_edge(prev, sink, EdgeLabel::Dfg);
    g
}

pub fn flow_with_path() -> Pattern {
    Pattern::new()
        .chain(
            node("p")
                .label(Label::Param)
                .out_star(&[EdgeLabel::Dfg])
                .to(node("n"))
                .path("flow"),
        )
        .filter(not(exists(
            Pattern::new().chain(node("n").out(&[EdgeLabel::Dfg]).to(anon().label(Label::Call))),
        )))
        .returns(&["p", "n"])
}

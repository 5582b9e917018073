//! Pattern model and a small builder vocabulary for writing patterns in code.
//!
//! A [`Pattern`] is a list of chains `(a)-[step]->(b)-[step]->(c)` plus a
//! filter. Variables with the same name denote the same binding, including
//! across nested [`Cond::Exists`] subpatterns.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cpg::{EdgeLabel, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropOp {
    Eq,
    Ne,
    /// Value is one of a list.
    In,
    /// Like `In` after upper-casing both sides.
    InUpper,
    /// String property contains the value as a substring.
    Contains,
    /// The part of the property before the first `{` contains the value.
    HeaderContains,
    /// Missing, null, or the empty string.
    IsNullOrEmpty,
    IsTrue,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropTest {
    pub key: String,
    pub op: PropOp,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub value: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NodePred {
    /// Every label must be present.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<Label>,
    /// At least one must be present, when non-empty.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub any_labels: Vec<Label>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<Label>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub props: Vec<PropTest>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NodePattern {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    #[serde(flatten)]
    pub pred: NodePred,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Out,
    In,
    Either,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathStep {
    /// Binds the edge of a single-hop step (for INDEX comparisons).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    /// Allowed edge labels; empty allows any.
    #[serde(default)]
    pub labels: Vec<EdgeLabel>,
    pub dir: Direction,
    pub min_hops: u32,
    /// `None` is unbounded.
    #[serde(default)]
    pub max_hops: Option<u32>,
    /// Label pairs that may not occur as consecutive edges of the traversal.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbid_pairs: Vec<(EdgeLabel, EdgeLabel)>,
}

impl PathStep {
    pub fn new(dir: Direction, labels: &[EdgeLabel]) -> Self {
        PathStep {
            var: None,
            labels: labels.to_vec(),
            dir,
            min_hops: 1,
            max_hops: Some(1),
            forbid_pairs: Vec::new(),
        }
    }

    /// One or more hops.
    pub fn star(mut self) -> Self {
        self.min_hops = 1;
        self.max_hops = None;
        self
    }

    pub fn hops(mut self, min: u32, max: Option<u32>) -> Self {
        self.min_hops = min;
        self.max_hops = max;
        self
    }

    pub fn bind(mut self, var: &str) -> Self {
        self.var = Some(var.into());
        self
    }

    pub fn forbid(mut self, first: EdgeLabel, then: EdgeLabel) -> Self {
        self.forbid_pairs.push((first, then));
        self
    }

    pub fn is_variable(&self) -> bool {
        self.min_hops != 1 || self.max_hops != Some(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub step: PathStep,
    pub node: NodePattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// Binds the node sequence of the whole chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    pub start: NodePattern,
    #[serde(default)]
    pub hops: Vec<Hop>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cond {
    #[default]
    True,
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
    Exists(Box<Pattern>),
    Prop { var: String, test: PropTest },
    HasLabel { var: String, label: Label },
    /// The node bound to `var` lies on the path bound to `path`.
    InPath { var: String, path: String },
    Same { a: String, b: String },
    Differ { a: String, b: String },
    /// Compares the INDEX properties of two bound edges.
    EdgeIndex { a: String, cmp: Cmp, b: String },
    /// `a.a_key = b.b_key` for two bound nodes.
    PropsEqual { a: String, a_key: String, b: String, b_key: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    pub chains: Vec<Chain>,
    #[serde(default, skip_serializing_if = "is_true")]
    pub filter: Cond,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub returns: Vec<String>,
}

fn is_true(c: &Cond) -> bool {
    *c == Cond::True
}

impl Pattern {
    pub fn new() -> Self {
        Pattern::default()
    }

    pub fn chain(mut self, c: impl Into<Chain>) -> Self {
        self.chains.push(c.into());
        self
    }

    pub fn filter(mut self, c: Cond) -> Self {
        self.filter = match self.filter {
            Cond::True => c,
            Cond::And(mut v) => {
                v.push(c);
                Cond::And(v)
            }
            other => Cond::And(vec![other, c]),
        };
        self
    }

    pub fn returns(mut self, vars: &[&str]) -> Self {
        self.returns = vars.iter().map(|v| v.to_string()).collect();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pattern serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Variables introduced by this pattern's chains, in order of appearance.
    pub fn chain_vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut add = |v: &Option<String>| {
            if let Some(v) = v {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        };
        for c in &self.chains {
            add(&c.path);
            add(&c.start.var);
            for h in &c.hops {
                add(&h.step.var);
                add(&h.node.var);
            }
        }
        out
    }
}

// ---- builders ----

/// A node pattern bound to `var`; the empty name is anonymous.
pub fn node(var: &str) -> NodePattern {
    NodePattern {
        var: (!var.is_empty()).then(|| var.to_string()),
        pred: NodePred::default(),
    }
}

pub fn anon() -> NodePattern {
    NodePattern::default()
}

impl NodePattern {
    pub fn label(mut self, l: Label) -> Self {
        self.pred.labels.push(l);
        self
    }

    pub fn any_label(mut self, ls: &[Label]) -> Self {
        self.pred.any_labels.extend_from_slice(ls);
        self
    }

    pub fn not_label(mut self, l: Label) -> Self {
        self.pred.forbidden.push(l);
        self
    }

    pub fn prop(mut self, key: &str, op: PropOp, value: impl Into<Value>) -> Self {
        self.pred.props.push(PropTest {
            key: key.into(),
            op,
            value: value.into(),
        });
        self
    }

    pub fn eq(self, key: &str, value: impl Into<Value>) -> Self {
        self.prop(key, PropOp::Eq, value)
    }

    pub fn one_of(self, key: &str, values: &[&str]) -> Self {
        self.prop(key, PropOp::In, strs(values))
    }

    /// Starts a chain at this node.
    pub fn out(self, labels: &[EdgeLabel]) -> ChainBuilder {
        ChainBuilder::from(self).out(labels)
    }

    pub fn out_star(self, labels: &[EdgeLabel]) -> ChainBuilder {
        ChainBuilder::from(self).out_star(labels)
    }

    pub fn inc(self, labels: &[EdgeLabel]) -> ChainBuilder {
        ChainBuilder::from(self).inc(labels)
    }

    pub fn inc_star(self, labels: &[EdgeLabel]) -> ChainBuilder {
        ChainBuilder::from(self).inc_star(labels)
    }

    pub fn either(self, labels: &[EdgeLabel]) -> ChainBuilder {
        ChainBuilder::from(self).either(labels)
    }

    pub fn step(self, s: PathStep) -> ChainBuilder {
        ChainBuilder::from(self).step(s)
    }
}

pub fn strs(values: &[&str]) -> Value {
    Value::from(values.iter().map(|s| s.to_string()).collect::<Vec<_>>())
}

/// Incrementally builds a [`Chain`]: call a step method, then [`ChainBuilder::to`].
#[derive(Debug, Clone)]
pub struct ChainBuilder {
    chain: Chain,
    pending: Option<PathStep>,
}

impl From<NodePattern> for ChainBuilder {
    fn from(start: NodePattern) -> Self {
        ChainBuilder {
            chain: Chain {
                path: None,
                start,
                hops: Vec::new(),
            },
            pending: None,
        }
    }
}

impl From<NodePattern> for Chain {
    fn from(start: NodePattern) -> Self {
        Chain {
            path: None,
            start,
            hops: Vec::new(),
        }
    }
}

impl From<ChainBuilder> for Chain {
    fn from(b: ChainBuilder) -> Self {
        assert!(b.pending.is_none(), "chain ends with a step and no node");
        b.chain
    }
}

impl ChainBuilder {
    pub fn step(mut self, s: PathStep) -> Self {
        assert!(self.pending.is_none(), "two steps without a node between them");
        self.pending = Some(s);
        self
    }

    pub fn out(self, labels: &[EdgeLabel]) -> Self {
        self.step(PathStep::new(Direction::Out, labels))
    }

    pub fn out_star(self, labels: &[EdgeLabel]) -> Self {
        self.step(PathStep::new(Direction::Out, labels).star())
    }

    pub fn inc(self, labels: &[EdgeLabel]) -> Self {
        self.step(PathStep::new(Direction::In, labels))
    }

    pub fn inc_star(self, labels: &[EdgeLabel]) -> Self {
        self.step(PathStep::new(Direction::In, labels).star())
    }

    pub fn either(self, labels: &[EdgeLabel]) -> Self {
        self.step(PathStep::new(Direction::Either, labels))
    }

    pub fn to(mut self, n: NodePattern) -> Self {
        let step = self.pending.take().expect("a step precedes the node");
        self.chain.hops.push(Hop { step, node: n });
        self
    }

    /// Binds the whole chain as a path variable.
    pub fn path(mut self, var: &str) -> Self {
        self.chain.path = Some(var.into());
        self
    }
}

// ---- condition helpers ----

pub fn and(cs: Vec<Cond>) -> Cond {
    Cond::And(cs)
}

pub fn or(cs: Vec<Cond>) -> Cond {
    Cond::Or(cs)
}

#[allow(clippy::should_implement_trait)]
pub fn not(c: Cond) -> Cond {
    Cond::Not(Box::new(c))
}

pub fn exists(p: Pattern) -> Cond {
    Cond::Exists(Box::new(p))
}

/// `exists { <chain> }` with no filter.
pub fn exists_chain(c: impl Into<Chain>) -> Cond {
    exists(Pattern::new().chain(c))
}

pub fn not_exists(p: Pattern) -> Cond {
    not(exists(p))
}

pub fn prop(var: &str, key: &str, op: PropOp, value: impl Into<Value>) -> Cond {
    Cond::Prop {
        var: var.into(),
        test: PropTest {
            key: key.into(),
            op,
            value: value.into(),
        },
    }
}

pub fn has_label(var: &str, label: Label) -> Cond {
    Cond::HasLabel {
        var: var.into(),
        label,
    }
}

pub fn in_path(var: &str, path: &str) -> Cond {
    Cond::InPath {
        var: var.into(),
        path: path.into(),
    }
}

pub fn differ(a: &str, b: &str) -> Cond {
    Cond::Differ {
        a: a.into(),
        b: b.into(),
    }
}

pub fn edge_index(a: &str, cmp: Cmp, b: &str) -> Cond {
    Cond::EdgeIndex {
        a: a.into(),
        cmp,
        b: b.into(),
    }
}

pub fn props_equal(a: &str, a_key: &str, b: &str, b_key: &str) -> Cond {
    Cond::PropsEqual {
        a: a.into(),
        a_key: a_key.into(),
        b: b.into(),
        b_key: b_key.into(),
    }
}

/// `not exists ((var)-[:labels]->())`: the node has no outgoing edge of these labels.
pub fn no_out(var: &str, labels: &[EdgeLabel]) -> Cond {
    not_exists(Pattern::new().chain(node(var).out(labels).to(anon())))
}

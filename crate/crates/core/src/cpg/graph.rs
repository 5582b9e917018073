use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

pub type NodeId = u32;

macro_rules! name_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(format!(concat!("unknown ", stringify!($name), " `{}`"), s)),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

name_enum!(
    /// Node labels. A node carries every label of its class hierarchy, e.g. a
    /// constructor is also a `FunctionDeclaration`.
    Label {
        TranslationUnit => "TranslationUnitDeclaration",
        Record => "RecordDeclaration",
        Function => "FunctionDeclaration",
        Constructor => "ConstructorDeclaration",
        Modifier => "ModifierDeclaration",
        Field => "FieldDeclaration",
        Variable => "VariableDeclaration",
        Param => "ParamVariableDeclaration",
        Declaration => "Declaration",
        DeclarationStatement => "DeclarationStatement",
        Call => "CallExpression",
        Member => "MemberExpression",
        Reference => "DeclaredReferenceExpression",
        BinaryOperator => "BinaryOperator",
        UnaryOperator => "UnaryOperator",
        Literal => "Literal",
        Return => "ReturnStatement",
        Rollback => "Rollback",
        Emit => "EmitStatement",
        Specified => "SpecifiedExpression",
        KeyValue => "KeyValueExpression",
        If => "IfStatement",
        For => "ForStatement",
        While => "WhileStatement",
        Do => "DoStatement",
        ForEach => "ForEachStatement",
        Block => "Block",
        Type => "Type",
        ObjectType => "ObjectType",
        Subscript => "ArraySubscriptionExpression",
        Conditional => "ConditionalExpression",
        ExpressionList => "ExpressionList",
        New => "NewExpression",
        Break => "BreakStatement",
        Continue => "ContinueStatement",
        InlineAssembly => "InlineAssembly",
        Placeholder => "Placeholder",
    }
);

name_enum!(
    EdgeLabel {
        Ast => "AST",
        Eog => "EOG",
        Dfg => "DFG",
        Invokes => "INVOKES",
        Returns => "RETURNS",
        RefersTo => "REFERS_TO",
        Parameters => "PARAMETERS",
        Arguments => "ARGUMENTS",
        Lhs => "LHS",
        Rhs => "RHS",
        Base => "BASE",
        Callee => "CALLEE",
        Type => "TYPE",
        Fields => "FIELDS",
        Body => "BODY",
        Initializer => "INITIALIZER",
        Specifiers => "SPECIFIERS",
        Key => "KEY",
        Value => "VALUE",
        SubscriptExpression => "SUBSCRIPT_EXPRESSION",
        ArrayExpression => "ARRAY_EXPRESSION",
        Input => "INPUT",
        Condition => "CONDITION",
        RecordDeclaration => "RECORD_DECLARATION",
        ThenStatement => "THEN_STATEMENT",
        ElseStatement => "ELSE_STATEMENT",
        Statement => "STATEMENT",
        Declarations => "DECLARATIONS",
        InitializerStatement => "INITIALIZER_STATEMENT",
        IterationStatement => "ITERATION_STATEMENT",
        ReturnValue => "RETURN_VALUE",
    }
);

/// Bit set over [`Label`]; serializes as a sorted list of label names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct LabelSet(u64);

impl LabelSet {
    pub fn of(labels: &[Label]) -> Self {
        let mut s = LabelSet::default();
        for l in labels {
            s.insert(*l);
        }
        s
    }

    pub fn insert(&mut self, l: Label) {
        self.0 |= 1 << l as u64;
    }

    pub fn remove(&mut self, l: Label) {
        self.0 &= !(1 << l as u64);
    }

    pub fn contains(self, l: Label) -> bool {
        self.0 & (1 << l as u64) != 0
    }

    pub fn is_superset(self, other: LabelSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn intersects(self, other: LabelSet) -> bool {
        self.0 & other.0 != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = Label> {
        Label::ALL.iter().copied().filter(move |l| self.contains(*l))
    }
}

impl Serialize for LabelSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut names: Vec<&str> = self.iter().map(Label::as_str).collect();
        names.sort_unstable();
        names.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LabelSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let labels = Vec::<Label>::deserialize(d)?;
        Ok(LabelSet::of(&labels))
    }
}

pub type Props = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpgNode {
    pub id: NodeId,
    pub labels: LabelSet,
    #[serde(rename = "properties")]
    pub props: Props,
}

impl CpgNode {
    pub fn has(&self, l: Label) -> bool {
        self.labels.contains(l)
    }

    pub fn prop(&self, key: &str) -> Option<&Value> {
        self.props.get(key).filter(|v| !v.is_null())
    }

    pub fn str_prop(&self, key: &str) -> Option<&str> {
        self.props.get(key).and_then(Value::as_str)
    }

    pub fn code(&self) -> &str {
        self.str_prop("code").unwrap_or("")
    }

    pub fn local_name(&self) -> &str {
        self.str_prop("localName").unwrap_or("")
    }

    pub fn is_inferred(&self) -> bool {
        self.props.get("isInferred").and_then(Value::as_bool).unwrap_or(false)
    }

    /// `(line, column)` of the node's source position, when known.
    pub fn location(&self) -> Option<(u32, u32)> {
        let loc = self.props.get("location")?;
        let line = loc.get("line")?.as_u64()? as u32;
        let column = loc.get("column")?.as_u64()? as u32;
        Some((line, column))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CpgEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: EdgeLabel,
    /// Position for PARAMETERS/ARGUMENTS/DECLARATIONS edges.
    #[serde(default, rename = "INDEX", skip_serializing_if = "Option::is_none")]
    pub index: Option<u32>,
}

pub type EdgeId = u32;

/// A code property graph. Node ids are dense indices; edges are kept in
/// insertion order, which is significant for AST children.
#[derive(Debug, Clone, Default)]
pub struct CpgGraph {
    nodes: Vec<CpgNode>,
    edges: Vec<CpgEdge>,
    out_adj: Vec<Vec<EdgeId>>,
    in_adj: Vec<Vec<EdgeId>>,
    pub roots: Vec<NodeId>,
    /// Non-fatal problems found while building (e.g. unresolved modifiers).
    pub diagnostics: Vec<String>,
    /// Major/minor of the snippet's `pragma solidity`, if any.
    pub pragma_version: Option<(u32, u32)>,
}

impl CpgGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[CpgNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[CpgEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &CpgNode {
        &self.nodes[id as usize]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut CpgNode {
        &mut self.nodes[id as usize]
    }

    pub fn edge(&self, id: EdgeId) -> &CpgEdge {
        &self.edges[id as usize]
    }

    pub fn add_node(&mut self, labels: &[Label]) -> NodeId {
        let id = self.nodes.len() as NodeId;
        self.nodes.push(CpgNode {
            id,
            labels: LabelSet::of(labels),
            props: Props::new(),
        });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        id
    }

    pub fn set_prop(&mut self, id: NodeId, key: &str, value: impl Into<Value>) {
        self.nodes[id as usize].props.insert(key.to_string(), value.into());
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, label: EdgeLabel) -> EdgeId {
        self.push_edge(CpgEdge {
            from,
            to,
            label,
            index: None,
        })
    }

    pub fn add_indexed_edge(&mut self, from: NodeId, to: NodeId, label: EdgeLabel, index: u32) -> EdgeId {
        self.push_edge(CpgEdge {
            from,
            to,
            label,
            index: Some(index),
        })
    }

    /// Adds the edge unless an identical one exists.
    pub fn ensure_edge(&mut self, from: NodeId, to: NodeId, label: EdgeLabel) {
        if !self.has_edge(from, to, label) {
            self.add_edge(from, to, label);
        }
    }

    pub fn push_edge(&mut self, e: CpgEdge) -> EdgeId {
        assert!((e.from as usize) < self.nodes.len() && (e.to as usize) < self.nodes.len());
        let id = self.edges.len() as EdgeId;
        self.out_adj[e.from as usize].push(id);
        self.in_adj[e.to as usize].push(id);
        self.edges.push(e);
        id
    }

    pub fn has_edge(&self, from: NodeId, to: NodeId, label: EdgeLabel) -> bool {
        self.out_adj[from as usize]
            .iter()
            .any(|&e| self.edges[e as usize].to == to && self.edges[e as usize].label == label)
    }

    /// Removes all edges matching `pred`, preserving the order of the rest.
    pub fn remove_edges(&mut self, mut pred: impl FnMut(&CpgEdge) -> bool) {
        let before = self.edges.len();
        self.edges.retain(|e| !pred(e));
        if self.edges.len() != before {
            self.rebuild_adjacency();
        }
    }

    fn rebuild_adjacency(&mut self) {
        for a in self.out_adj.iter_mut().chain(self.in_adj.iter_mut()) {
            a.clear();
        }
        for (i, e) in self.edges.iter().enumerate() {
            self.out_adj[e.from as usize].push(i as EdgeId);
            self.in_adj[e.to as usize].push(i as EdgeId);
        }
    }

    pub fn out_edges(&self, id: NodeId) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.out_adj[id as usize].iter().map(|&e| &self.edges[e as usize])
    }

    pub fn in_edges(&self, id: NodeId) -> impl Iterator<Item = &CpgEdge> + '_ {
        self.in_adj[id as usize].iter().map(|&e| &self.edges[e as usize])
    }

    pub fn out_edge_ids(&self, id: NodeId) -> &[EdgeId] {
        &self.out_adj[id as usize]
    }

    pub fn in_edge_ids(&self, id: NodeId) -> &[EdgeId] {
        &self.in_adj[id as usize]
    }

    /// Targets of `label` edges out of `id`, in insertion order (by INDEX when present).
    pub fn targets(&self, id: NodeId, label: EdgeLabel) -> Vec<NodeId> {
        let mut es: Vec<&CpgEdge> = self.out_edges(id).filter(|e| e.label == label).collect();
        if es.iter().any(|e| e.index.is_some()) {
            es.sort_by_key(|e| e.index.unwrap_or(u32::MAX));
        }
        es.into_iter().map(|e| e.to).collect()
    }

    pub fn target(&self, id: NodeId, label: EdgeLabel) -> Option<NodeId> {
        self.out_edges(id).find(|e| e.label == label).map(|e| e.to)
    }

    pub fn sources(&self, id: NodeId, label: EdgeLabel) -> Vec<NodeId> {
        self.in_edges(id).filter(|e| e.label == label).map(|e| e.from).collect()
    }

    /// AST children in order.
    pub fn ast_children(&self, id: NodeId) -> Vec<NodeId> {
        self.targets(id, EdgeLabel::Ast)
    }

    pub fn ast_parent(&self, id: NodeId) -> Option<NodeId> {
        self.in_edges(id).find(|e| e.label == EdgeLabel::Ast).map(|e| e.from)
    }

    pub fn nodes_with(&self, l: Label) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().filter(move |n| n.has(l)).map(|n| n.id)
    }

    /// Nodes reachable from `start` over AST edges, `start` included, pre-order.
    pub fn ast_subtree(&self, start: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            out.push(n);
            let kids = self.ast_children(n);
            stack.extend(kids.into_iter().rev());
        }
        out
    }

    pub(crate) fn from_parts(nodes: Vec<CpgNode>, edges: Vec<CpgEdge>, roots: Vec<NodeId>) -> Result<Self, String> {
        let mut g = CpgGraph::new();
        for (i, n) in nodes.into_iter().enumerate() {
            if n.id as usize != i {
                return Err(format!("node ids must be dense and ordered; found {} at {i}", n.id));
            }
            g.nodes.push(n);
            g.out_adj.push(Vec::new());
            g.in_adj.push(Vec::new());
        }
        for e in edges {
            if e.from as usize >= g.nodes.len() || e.to as usize >= g.nodes.len() {
                return Err(format!("edge {}->{} has a missing endpoint", e.from, e.to));
            }
            g.push_edge(e);
        }
        for r in &roots {
            if *r as usize >= g.nodes.len() {
                return Err(format!("root {r} does not exist"));
            }
        }
        g.roots = roots;
        Ok(g)
    }
}

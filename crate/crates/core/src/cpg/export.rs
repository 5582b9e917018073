//! JSON and DOT renderings of a graph.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::graph::{CpgEdge, CpgGraph, CpgNode, EdgeLabel, NodeId};
use super::CpgError;

pub const GRAPH_FORMAT: &str = "sodd-cpg";
pub const GRAPH_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    format: String,
    version: u32,
    roots: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pragma: Option<(u32, u32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    diagnostics: Vec<String>,
    nodes: Vec<CpgNode>,
    edges: Vec<CpgEdge>,
}

pub fn to_json(g: &CpgGraph) -> String {
    let doc = GraphDoc {
        format: GRAPH_FORMAT.into(),
        version: GRAPH_VERSION,
        roots: g.roots.clone(),
        pragma: g.pragma_version,
        diagnostics: g.diagnostics.clone(),
        nodes: g.nodes().to_vec(),
        edges: g.edges().to_vec(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}

pub fn from_json(text: &str) -> Result<CpgGraph, CpgError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| CpgError::Import(e.to_string()))?;
    if doc.format != GRAPH_FORMAT {
        return Err(CpgError::Import(format!("unexpected format `{}`", doc.format)));
    }
    if doc.version != GRAPH_VERSION {
        return Err(CpgError::Import(format!("unsupported version {}", doc.version)));
    }
    let mut g = CpgGraph::from_parts(doc.nodes, doc.edges, doc.roots).map_err(CpgError::Import)?;
    g.pragma_version = doc.pragma;
    g.diagnostics = doc.diagnostics;
    Ok(g)
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n")
}

/// DOT with evaluation order green, data flow blue and syntax gray; other
/// edges are dashed black.
pub fn to_dot(g: &CpgGraph) -> String {
    let mut out = String::from("digraph cpg {\n  node [shape=box, fontname=\"monospace\"];\n");
    for n in g.nodes() {
        let label = n.labels.iter().next().map(|l| l.as_str()).unwrap_or("");
        let code = n.code();
        let code = if code.chars().count() > 40 {
            format!("{}...", code.chars().take(40).collect::<String>())
        } else {
            code.to_string()
        };
        let _ = writeln!(out, "  n{} [label=\"{}\\n{}\"];", n.id, escape(label), escape(&code));
    }
    for e in g.edges() {
        let style = match e.label {
            EdgeLabel::Eog => "color=green",
            EdgeLabel::Dfg => "color=blue",
            EdgeLabel::Ast => "color=gray",
            _ => "color=black, style=dashed",
        };
        let _ = writeln!(out, "  n{} -> n{} [label=\"{}\", {}];", e.from, e.to, e.label, style);
    }
    out.push_str("}\n");
    out
}

//! The seventeen vulnerability detectors and their DASP categories.
//!
//! Each detector is one [`Pattern`]; a finding is the node bound to the
//! detector's report variable. Findings are ordered by node id, then detector.

mod queries;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpg::{CpgGraph, NodeId};
use crate::graphquery::{match_pattern, Budget, Pattern, QueryError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DaspCategory {
    #[serde(rename = "Access Control")]
    AccessControl,
    #[serde(rename = "Arithmetic")]
    Arithmetic,
    #[serde(rename = "Bad Randomness")]
    BadRandomness,
    #[serde(rename = "Denial of Service")]
    DenialOfService,
    #[serde(rename = "Front Running")]
    FrontRunning,
    #[serde(rename = "Reentrancy")]
    Reentrancy,
    #[serde(rename = "Short Addresses")]
    ShortAddresses,
    #[serde(rename = "Time Manipulation")]
    TimeManipulation,
    #[serde(rename = "Unchecked Low Level Calls")]
    UncheckedLowLevelCalls,
    #[serde(rename = "Unknown Unknowns")]
    UnknownUnknowns,
}

impl DaspCategory {
    pub const ALL: [DaspCategory; 10] = [
        DaspCategory::AccessControl,
        DaspCategory::Arithmetic,
        DaspCategory::BadRandomness,
        DaspCategory::DenialOfService,
        DaspCategory::FrontRunning,
        DaspCategory::Reentrancy,
        DaspCategory::ShortAddresses,
        DaspCategory::TimeManipulation,
        DaspCategory::UncheckedLowLevelCalls,
        DaspCategory::UnknownUnknowns,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DaspCategory::AccessControl => "Access Control",
            DaspCategory::Arithmetic => "Arithmetic",
            DaspCategory::BadRandomness => "Bad Randomness",
            DaspCategory::DenialOfService => "Denial of Service",
            DaspCategory::FrontRunning => "Front Running",
            DaspCategory::Reentrancy => "Reentrancy",
            DaspCategory::ShortAddresses => "Short Addresses",
            DaspCategory::TimeManipulation => "Time Manipulation",
            DaspCategory::UncheckedLowLevelCalls => "Unchecked Low Level Calls",
            DaspCategory::UnknownUnknowns => "Unknown Unknowns",
        }
    }
}

impl fmt::Display for DaspCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DaspCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        DaspCategory::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown DASP category `{s}`"))
    }
}

/// Tunables that are not part of the patterns' structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DetectorConfig {
    /// Literal bound above which a loop counts as expensive.
    pub loop_threshold: f64,
    /// Drop arithmetic findings when the pragma requests checked arithmetic (0.8 or later).
    pub suppress_arith_ge_0_8: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            loop_threshold: 100.0,
            suppress_arith_ge_0_8: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DetectorSpec {
    pub id: &'static str,
    pub category: DaspCategory,
    pub description: &'static str,
    pub patterns: Vec<Pattern>,
    /// Variable whose binding is reported.
    pub report: &'static str,
}

type Builder = fn(&DetectorConfig) -> Pattern;

const REGISTRY: [(&str, DaspCategory, &str, &str, Builder); 17] = [
    (
        "access-control-state-write",
        DaspCategory::AccessControl,
        "Unrestricted write to a state variable that guards access",
        "entry",
        |_| queries::access_control_state_write(),
    ),
    (
        "access-control-selfdestruct",
        DaspCategory::AccessControl,
        "Unrestricted path to selfdestruct",
        "c",
        |_| queries::access_control_selfdestruct(),
    ),
    (
        "short-address-call",
        DaspCategory::ShortAddresses,
        "Amount parameter after an address parameter reaches a transfer",
        "c",
        |_| queries::short_address_call(),
    ),
    (
        "short-address-state",
        DaspCategory::ShortAddresses,
        "Trailing parameter after an address parameter is written to state",
        "ad",
        |_| queries::short_address_state(),
    ),
    (
        "bad-randomness",
        DaspCategory::BadRandomness,
        "Block data used as a source of randomness",
        "r",
        |_| queries::bad_randomness(),
    ),
    (
        "dos-blocking-call",
        DaspCategory::DenialOfService,
        "Failing transfer blocks a later transfer",
        "c",
        |_| queries::dos_blocking_call(),
    ),
    (
        "dos-blocking-state",
        DaspCategory::DenialOfService,
        "Failing transfer blocks a later state change",
        "c",
        |_| queries::dos_blocking_state(),
    ),
    (
        "unchecked-return",
        DaspCategory::UncheckedLowLevelCalls,
        "Return value of a low-level call is ignored",
        "c",
        |_| queries::unchecked_return(),
    ),
    (
        "dos-gas-loop",
        DaspCategory::DenialOfService,
        "Loop whose cost an attacker can drive up",
        "b",
        |cfg| queries::dos_gas_loop(cfg.loop_threshold),
    ),
    (
        "default-proxy-delegate",
        DaspCategory::AccessControl,
        "Fallback delegates unchecked message data",
        "c",
        |_| queries::default_proxy_delegate(),
    ),
    (
        "dos-empty-collection",
        DaspCategory::DenialOfService,
        "Payout collection can be overwritten after construction",
        "b",
        |_| queries::dos_empty_collection(),
    ),
    (
        "front-running",
        DaspCategory::FrontRunning,
        "State change any sender, including a miner, benefits from equally",
        "int",
        |_| queries::front_running(),
    ),
    (
        "local-struct-write",
        DaspCategory::UnknownUnknowns,
        "Write through an uninitialized storage pointer",
        "v",
        |_| queries::local_struct_write(),
    ),
    (
        "over-underflow",
        DaspCategory::Arithmetic,
        "Unchecked arithmetic on caller-controlled values",
        "b",
        |_| queries::over_underflow(),
    ),
    (
        "reentrancy",
        DaspCategory::Reentrancy,
        "State write reachable after an external call",
        "c",
        |_| queries::reentrancy(),
    ),
    (
        "time-manipulation",
        DaspCategory::TimeManipulation,
        "Block time influences the outcome",
        "r",
        |_| queries::time_manipulation(),
    ),
    (
        "tx-origin",
        DaspCategory::AccessControl,
        "Branching on tx.origin compared with state",
        "n",
        |_| queries::tx_origin(),
    ),
];

/// Detector ids in registry order.
pub fn detector_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|r| r.0).collect()
}

pub fn registry(config: &DetectorConfig) -> Vec<DetectorSpec> {
    REGISTRY
        .iter()
        .map(|&(id, category, description, report, build)| DetectorSpec {
            id,
            category,
            description,
            patterns: vec![build(config)],
            report,
        })
        .collect()
}

pub fn detector(id: &str, config: &DetectorConfig) -> Option<DetectorSpec> {
    registry(config).into_iter().find(|d| d.id == id)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub detector: String,
    pub category: DaspCategory,
    pub node: NodeId,
    pub code: String,
    pub line: Option<u32>,
    pub column: Option<u32>,
    /// False when a reduced hop cap produced the finding's search.
    pub complete: bool,
}

impl Finding {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("finding serializes")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectorError {
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("detector `{id}`: {source}")]
    Query {
        id: String,
        #[source]
        source: QueryError,
    },
}

/// Findings of a set of detectors plus whether every search ran uncapped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub findings: Vec<Finding>,
    pub complete: bool,
}

fn run_spec(g: &CpgGraph, spec: &DetectorSpec, budget: &Budget, config: &DetectorConfig) -> Result<Analysis, DetectorError> {
    if spec.category == DaspCategory::Arithmetic
        && config.suppress_arith_ge_0_8
        && g.pragma_version.is_some_and(|v| v >= (0, 8))
    {
        return Ok(Analysis {
            findings: Vec::new(),
            complete: true,
        });
    }
    let mut nodes = BTreeSet::new();
    let mut complete = true;
    for p in &spec.patterns {
        let out = match_pattern(g, p, budget).map_err(|source| DetectorError::Query {
            id: spec.id.to_string(),
            source,
        })?;
        complete &= out.complete;
        nodes.extend(out.bindings.iter().filter_map(|b| b.get(spec.report).copied()));
    }
    let findings = nodes
        .into_iter()
        .map(|n| {
            let node = g.node(n);
            let loc = node.location();
            Finding {
                detector: spec.id.to_string(),
                category: spec.category,
                node: n,
                code: node.code().to_string(),
                line: loc.map(|l| l.0),
                column: loc.map(|l| l.1),
                complete,
            }
        })
        .collect();
    Ok(Analysis { findings, complete })
}

pub fn run_detector(
    g: &CpgGraph,
    id: &str,
    budget: &Budget,
    config: &DetectorConfig,
) -> Result<Vec<Finding>, DetectorError> {
    let spec = detector(id, config).ok_or_else(|| DetectorError::UnknownDetector(id.to_string()))?;
    Ok(run_spec(g, &spec, budget, config)?.findings)
}

/// Runs the selected detectors (all when `restrict` is `None`), descending the
/// budget's hop-cap ladder per detector when a search runs out of time.
pub fn analyze_with_budget(
    g: &CpgGraph,
    budget: &Budget,
    config: &DetectorConfig,
    restrict: Option<&[String]>,
) -> Result<Analysis, DetectorError> {
    let specs = registry(config);
    if let Some(ids) = restrict {
        if let Some(bad) = ids.iter().find(|id| !specs.iter().any(|s| s.id == id.as_str())) {
            return Err(DetectorError::UnknownDetector(bad.clone()));
        }
    }
    let selected: Vec<&DetectorSpec> = specs
        .iter()
        .filter(|s| restrict.is_none_or(|ids| ids.iter().any(|i| i == s.id)))
        .collect();
    let runs: Vec<Result<Analysis, DetectorError>> =
        selected.par_iter().map(|s| run_spec(g, s, budget, config)).collect();
    let mut findings = Vec::new();
    let mut complete = true;
    for r in runs {
        let a = r?;
        complete &= a.complete;
        findings.extend(a.findings);
    }
    findings.sort_by(|a, b| (a.node, &a.detector).cmp(&(b.node, &b.detector)));
    Ok(Analysis { findings, complete })
}

pub fn run_all(
    g: &CpgGraph,
    budget: &Budget,
    config: &DetectorConfig,
    restrict: Option<&[String]>,
) -> Result<Vec<Finding>, DetectorError> {
    Ok(analyze_with_budget(g, budget, config, restrict)?.findings)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_ids_are_unique_and_complete() {
        let ids = detector_ids();
        assert_eq!(ids.len(), 17);
        let set: BTreeSet<_> = ids.iter().collect();
        assert_eq!(set.len(), 17);
    }

    #[test]
    fn every_pattern_compiles_and_round_trips() {
        for spec in registry(&DetectorConfig::default()) {
            for p in &spec.patterns {
                crate::graphquery::CompiledPattern::new(p).unwrap_or_else(|e| panic!("{}: {e}", spec.id));
                assert_eq!(&Pattern::from_json(&p.to_json()).unwrap(), p, "{}", spec.id);
                assert!(p.returns.iter().any(|r| r == spec.report), "{}", spec.id);
            }
        }
    }

    #[test]
    fn categories_parse_back() {
        for c in DaspCategory::ALL {
            assert_eq!(c.as_str().parse::<DaspCategory>(), Ok(c));
        }
    }

    #[test]
    fn unknown_detector_is_an_error() {
        let g = CpgGraph::new();
        let err = run_detector(&g, "nope", &Budget::default(), &DetectorConfig::default()).unwrap_err();
        assert_eq!(err, DetectorError::UnknownDetector("nope".into()));
    }

    #[test]
    fn empty_graph_has_no_findings() {
        let g = CpgGraph::new();
        let all = run_all(&g, &Budget::default(), &DetectorConfig::default(), None).unwrap();
        assert!(all.is_empty());
    }
}

//! Re-running a snippet's detectors on the contracts that embed it.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CloneLink;
use crate::cpg::build_from_source;
use crate::detectors::{analyze_with_budget, DetectorConfig, DetectorError, Finding};
use crate::graphquery::{Budget, QueryError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContractVerdict {
    pub contract_id: String,
    pub findings: Vec<Finding>,
    /// False when a hop cap from the reduction ladder was needed.
    pub complete: bool,
    /// Set when the contract could not be analyzed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Whether the first, ladder-free pass timed out.
    pub rerun: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub verdicts: Vec<ContractVerdict>,
    /// Contracts with at least one finding from their snippets' detectors.
    pub vulnerable_contracts: BTreeSet<String>,
    /// (snippet, contract) links where the contract shows a snippet finding.
    pub vulnerable_pairs: BTreeSet<(String, String)>,
    pub failures: usize,
}

/// Analyzes each linked contract once, restricted to the union of the
/// detector ids of the snippets linking to it. A first pass runs without the
/// reduction ladder; contracts that time out are re-run with it. A pair is
/// vulnerable when the contract has a finding from that snippet's detectors.
pub fn validate(
    links: &[CloneLink],
    detectors_of: &BTreeMap<String, BTreeSet<String>>,
    contract_code: &BTreeMap<String, String>,
    budget: &Budget,
    config: &DetectorConfig,
) -> ValidationReport {
    let mut wanted: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for l in links {
        if let Some(ids) = detectors_of.get(&l.snippet_id).filter(|d| !d.is_empty()) {
            wanted.entry(l.contract_id.as_str()).or_default().extend(ids.iter().cloned());
        }
    }
    let jobs: Vec<(&str, Vec<String>)> = wanted.into_iter().map(|(c, ids)| (c, ids.into_iter().collect())).collect();
    let verdicts: Vec<ContractVerdict> = jobs
        .par_iter()
        .map(|(cid, ids)| match contract_code.get(*cid) {
            Some(code) => analyze_contract(cid, code, ids, budget, config),
            None => failed(cid, "contract source unavailable".into()),
        })
        .collect();

    let mut report = ValidationReport::default();
    for v in &verdicts {
        if v.failure.is_some() {
            report.failures += 1;
        } else if !v.findings.is_empty() {
            report.vulnerable_contracts.insert(v.contract_id.clone());
        }
    }
    let by_contract: BTreeMap<&str, &ContractVerdict> = verdicts.iter().map(|v| (v.contract_id.as_str(), v)).collect();
    for l in links {
        let (Some(ids), Some(v)) = (detectors_of.get(&l.snippet_id), by_contract.get(l.contract_id.as_str())) else {
            continue;
        };
        if v.findings.iter().any(|f| ids.contains(&f.detector)) {
            report.vulnerable_pairs.insert((l.snippet_id.clone(), l.contract_id.clone()));
        }
    }
    report.verdicts = verdicts;
    report
}

fn failed(cid: &str, why: String) -> ContractVerdict {
    ContractVerdict { contract_id: cid.to_string(), findings: Vec::new(), complete: false, failure: Some(why), rerun: false }
}

fn analyze_contract(cid: &str, code: &str, ids: &[String], budget: &Budget, config: &DetectorConfig) -> ContractVerdict {
    let graph = match build_from_source(code) {
        Ok(g) => g,
        Err(e) => return failed(cid, e.to_string()),
    };
    let first = analyze_with_budget(&graph, &budget.clone().with_ladder(Vec::new()), config, Some(ids));
    let (result, rerun) = match first {
        Err(DetectorError::Query { source: QueryError::BudgetExhausted { .. }, .. }) => {
            (analyze_with_budget(&graph, budget, config, Some(ids)), true)
        }
        other => (other, false),
    };
    match result {
        Ok(a) => ContractVerdict { contract_id: cid.to_string(), findings: a.findings, complete: a.complete, failure: None, rerun },
        Err(e) => ContractVerdict { rerun, ..failed(cid, e.to_string()) },
    }
}

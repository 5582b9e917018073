//! The end-to-end study: filter, dedup, detect, map clones, validate, report.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    classify, dedup, filter_solidity, link_in, map_clones, spearman, validate, CloneLink, ContractRecord,
    CorrelationResult, DatedFingerprint, KeywordList, Permutation, PipelineError, SnippetRecord, TemporalClass,
    ValidationReport,
};
use crate::clone::{fingerprint_source, CloneParams, NgramIndex};
use crate::cpg::build_from_source;
use crate::detectors::{detector, run_all, DaspCategory, DetectorConfig};
use crate::graphquery::Budget;

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub clone: CloneParams,
    pub budget: Budget,
    pub detectors: DetectorConfig,
    /// Detector ids to run on snippets; all when `None`.
    pub restrict: Option<Vec<String>>,
    pub keywords: KeywordList,
    /// Worker threads; the global pool when `None`.
    pub jobs: Option<usize>,
    /// Seed for permutation p-values; none are computed when `None`.
    pub seed: Option<u64>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            clone: CloneParams::study(),
            budget: Budget::default(),
            detectors: DetectorConfig::default(),
            restrict: None,
            keywords: KeywordList::bundled(),
            jobs: None,
            seed: None,
        }
    }
}

/// Counts narrowing from all snippets down to validated contracts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Funnel {
    pub ingested_snippets: usize,
    pub solidity_snippets: usize,
    pub unique_snippets: usize,
    pub vulnerable_snippets: usize,
    /// Vulnerable snippets with at least one matching contract.
    pub contained_in_contracts: usize,
    /// ... of which at least one match was deployed after the posting.
    pub posted_before_deployment: usize,
    /// ... of which every match was deployed after the posting.
    pub source_snippets: usize,
    /// Links from vulnerable snippets to contracts deployed after the posting.
    pub contracts: usize,
    pub unique_contracts: usize,
    pub validated_contracts: usize,
    pub validated_pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorrelationRow {
    pub class: TemporalClass,
    /// Snippets with at least one matching contract in this class.
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<CorrelationResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Failures {
    pub snippet_analysis: BTreeMap<String, String>,
    pub snippet_fingerprint: BTreeMap<String, String>,
    pub contract_fingerprint: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudyReport {
    pub funnel: Funnel,
    /// Vulnerable snippets per category; a snippet counts once per category.
    pub categories: BTreeMap<String, usize>,
    pub correlations: Vec<CorrelationRow>,
    pub vulnerable_snippets: BTreeMap<String, BTreeSet<String>>,
    pub links: Vec<CloneLink>,
    pub validation: ValidationReport,
    pub failures: Failures,
}

pub fn run_study(
    snippets: &[SnippetRecord],
    contracts: &[ContractRecord],
    config: &StudyConfig,
) -> Result<StudyReport, PipelineError> {
    config.clone.validate()?;
    match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| PipelineError::Io(e.to_string()))?
            .install(|| study(snippets, contracts, config)),
        None => study(snippets, contracts, config),
    }
}

fn study(snippets: &[SnippetRecord], contracts: &[ContractRecord], config: &StudyConfig) -> Result<StudyReport, PipelineError> {
    let mut failures = Failures::default();
    let solidity = filter_solidity(snippets.to_vec(), &config.keywords);
    let unique = dedup(&solidity).records;

    let analyzed: Vec<(String, Result<BTreeSet<String>, String>)> = unique
        .par_iter()
        .map(|s| {
            let r = build_from_source(&s.code).map_err(|e| e.to_string()).and_then(|g| {
                run_all(&g, &config.budget, &config.detectors, config.restrict.as_deref())
                    .map(|fs| fs.into_iter().map(|f| f.detector).collect())
                    .map_err(|e| e.to_string())
            });
            (s.id.clone(), r)
        })
        .collect();
    let mut vulnerable: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (id, r) in analyzed {
        match r {
            Ok(ids) if !ids.is_empty() => {
                vulnerable.insert(id, ids);
            }
            Ok(_) => {}
            Err(e) => {
                failures.snippet_analysis.insert(id, e);
            }
        }
    }

    let unique_contracts = dedup(contracts).records;
    let fingerprinted: Vec<_> = unique_contracts.par_iter().map(|c| (c, fingerprint_source(c.id.clone(), &c.code))).collect();
    let mut index = NgramIndex::new(config.clone.ngram)?;
    let mut deployed = HashMap::new();
    for (c, fp) in fingerprinted {
        match fp {
            Ok(fp) => {
                index.add(fp)?;
                deployed.insert(c.id.clone(), c.deployed_at);
            }
            Err(e) => {
                failures.contract_fingerprint.insert(c.id.clone(), e.to_string());
            }
        }
    }

    let mut dated = Vec::new();
    for s in &unique {
        match fingerprint_source(s.id.clone(), &s.code) {
            Ok(fingerprint) => dated.push(DatedFingerprint { fingerprint, at: s.created_at }),
            Err(e) => {
                failures.snippet_fingerprint.insert(s.id.clone(), e.to_string());
            }
        }
    }
    let links = map_clones(&dated, &index, &deployed, &config.clone)?;
    let classes = classify(&links);

    let to_validate: Vec<CloneLink> = links
        .iter()
        .filter(|l| vulnerable.contains_key(&l.snippet_id) && link_in(l, TemporalClass::Disseminator))
        .cloned()
        .collect();
    let code: BTreeMap<String, String> = unique_contracts.iter().map(|c| (c.id.clone(), c.code.clone())).collect();
    let validation = validate(&to_validate, &vulnerable, &code, &config.budget, &config.detectors);

    let vuln_class = |f: fn(&super::SnippetClass) -> bool| {
        vulnerable.keys().filter(|id| classes.get(*id).is_some_and(f)).count()
    };
    let funnel = Funnel {
        ingested_snippets: snippets.len(),
        solidity_snippets: solidity.len(),
        unique_snippets: unique.len(),
        vulnerable_snippets: vulnerable.len(),
        contained_in_contracts: vuln_class(|c| c.all),
        posted_before_deployment: vuln_class(|c| c.disseminator),
        source_snippets: vuln_class(|c| c.source),
        contracts: to_validate.len(),
        unique_contracts: to_validate.iter().map(|l| &l.contract_id).collect::<BTreeSet<_>>().len(),
        validated_contracts: validation.vulnerable_contracts.len(),
        validated_pairs: validation.vulnerable_pairs.len(),
    };

    Ok(StudyReport {
        funnel,
        categories: category_histogram(&vulnerable, &config.detectors),
        correlations: correlations(&unique, &links, config.seed),
        vulnerable_snippets: vulnerable,
        links,
        validation,
        failures,
    })
}

fn category_histogram(vulnerable: &BTreeMap<String, BTreeSet<String>>, config: &DetectorConfig) -> BTreeMap<String, usize> {
    let mut hist: BTreeMap<String, usize> = DaspCategory::ALL.iter().map(|c| (c.to_string(), 0)).collect();
    for ids in vulnerable.values() {
        let cats: BTreeSet<DaspCategory> = ids.iter().filter_map(|id| detector(id, config)).map(|d| d.category).collect();
        for c in cats {
            *hist.entry(c.to_string()).or_default() += 1;
        }
    }
    hist
}

/// Views against the number of distinct matching contracts, per class, over
/// snippets with at least one match in that class.
fn correlations(snippets: &[SnippetRecord], links: &[CloneLink], seed: Option<u64>) -> Vec<CorrelationRow> {
    [TemporalClass::All, TemporalClass::Disseminator, TemporalClass::Source]
        .into_iter()
        .map(|class| {
            let mut nr: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for l in links.iter().filter(|l| link_in(l, class)) {
                nr.entry(&l.snippet_id).or_default().insert(&l.contract_id);
            }
            let pairs: Vec<(f64, f64)> = snippets
                .iter()
                .filter_map(|s| nr.get(s.id.as_str()).map(|c| (s.views as f64, c.len() as f64)))
                .collect();
            match spearman(&pairs, seed.map(Permutation::new)) {
                Ok(r) => CorrelationRow { class, n: pairs.len(), result: Some(r), note: None },
                Err(e) => CorrelationRow { class, n: pairs.len(), result: None, note: Some(e.to_string()) },
            }
        })
        .collect()
}

/// Plain-text rendering of the three tables.
pub fn render_text(report: &StudyReport) -> String {
    let f = &report.funnel;
    let mut s = String::new();
    let rows = [
        ("ingested snippets", f.ingested_snippets),
        ("solidity snippets", f.solidity_snippets),
        ("unique snippets", f.unique_snippets),
        ("vulnerable", f.vulnerable_snippets),
        ("contained in contracts", f.contained_in_contracts),
        ("posted before deployment", f.posted_before_deployment),
        ("source snippets", f.source_snippets),
        ("contracts", f.contracts),
        ("unique contracts", f.unique_contracts),
        ("validated contracts", f.validated_contracts),
        ("validated pairs", f.validated_pairs),
    ];
    s.push_str("Analysis funnel\n");
    for (name, n) in rows {
        let _ = writeln!(s, "  {name:<28}{n:>8}");
    }
    s.push_str("\nVulnerable snippets by DASP category\n");
    for (cat, n) in &report.categories {
        let _ = writeln!(s, "  {cat:<28}{n:>8}");
    }
    s.push_str("\nViews vs. containing contracts (Spearman)\n");
    for row in &report.correlations {
        let class = format!("{:?}", row.class);
        match (&row.result, &row.note) {
            (Some(r), _) => {
                let _ = writeln!(s, "  {class:<14} n={:<6} rho={:>7.4} p={:.4}", r.n, r.rho, r.p_value);
            }
            (None, note) => {
                let _ = writeln!(s, "  {class:<14} n={:<6} {}", row.n, note.as_deref().unwrap_or(""));
            }
        }
    }
    s
}

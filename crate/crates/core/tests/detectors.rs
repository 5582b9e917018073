//! Positive/mitigated fixture pairs, one per detector.

use std::time::{Duration, Instant};

use sodd::cpg::{build_from_source, CpgGraph};
use sodd::detectors::{analyze_with_budget, detector_ids, run_all, run_detector, DetectorConfig};
use sodd::graphquery::Budget;

mod support;
use support::fixtures::{deep_guard, detector_fixture, selfdestruct_only};

fn fixture(name: &str) -> CpgGraph {
    build_from_source(&detector_fixture(name)).unwrap()
}

fn count(id: &str, file: &str) -> usize {
    run_detector(&fixture(file), id, &Budget::default(), &DetectorConfig::default())
        .unwrap()
        .len()
}

#[test]
fn each_detector_fires_once_on_its_fixture_and_never_on_the_twin() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for id in detector_ids() {
        let vuln = count(id, &format!("{id}.vuln.sol"));
        let safe = count(id, &format!("{id}.safe.sol"));
        println!("{id:<28} vulnerable={vuln} mitigated={safe}");
        if vuln != 1 || safe != 0 {
            failures.push(id);
        }
    }
    assert!(failures.is_empty(), "failing detectors: {failures:?}");
    assert!(start.elapsed() < Duration::from_secs(10), "took {:?}", start.elapsed());
}

#[test]
fn findings_carry_their_detector_category() {
    let config = DetectorConfig::default();
    for id in detector_ids() {
        let g = fixture(&format!("{id}.vuln.sol"));
        let spec = sodd::detectors::detector(id, &config).unwrap();
        for f in run_all(&g, &Budget::default(), &config, None).unwrap() {
            let own = sodd::detectors::detector(&f.detector, &config).unwrap();
            assert_eq!(f.category, own.category);
            assert!((f.node as usize) < g.node_count());
        }
        let _ = spec;
    }
}

#[test]
fn restricted_runs_are_a_subset_of_the_full_run() {
    let config = DetectorConfig::default();
    let g = fixture("reentrancy.vuln.sol");
    let all = run_all(&g, &Budget::default(), &config, None).unwrap();
    let only = run_all(&g, &Budget::default(), &config, Some(&["reentrancy".to_string()])).unwrap();
    assert_eq!(only.len(), 1);
    assert!(only.iter().all(|f| all.contains(f)));
}

#[test]
fn spec_examples() {
    let cfg = DetectorConfig::default();
    let b = Budget::default();
    let wallet = build_from_source(include_str!("fixtures/guarded_withdraw.sol")).unwrap();
    let found = run_detector(&wallet, "unchecked-return", &b, &cfg).unwrap();
    assert_eq!(found.len(), 1);
    assert!(found[0].code.starts_with("msg.sender.call{value:this.balance}"), "{}", found[0].code);
}

#[test]
fn arithmetic_suppression_follows_the_pragma() {
    let src = "pragma solidity ^0.8.0;\ncontract Bank { uint total; function add(uint x) public { total = total + x; } }";
    let g = build_from_source(src).unwrap();
    let b = Budget::default();
    assert_eq!(run_detector(&g, "over-underflow", &b, &DetectorConfig::default()).unwrap().len(), 1);
    let cfg = DetectorConfig { suppress_arith_ge_0_8: true, ..DetectorConfig::default() };
    assert!(run_detector(&g, "over-underflow", &b, &cfg).unwrap().is_empty());
}

#[test]
fn generous_budget_matches_run_all() {
    let cfg = DetectorConfig::default();
    let g = fixture("over-underflow.vuln.sol");
    let a = analyze_with_budget(&g, &Budget::default(), &cfg, None).unwrap();
    assert!(a.complete);
    assert_eq!(a.findings, run_all(&g, &Budget::default(), &cfg, None).unwrap());
}

#[test]
fn cross_talk_report() {
    // informational: which other detectors fire on each fixture
    let cfg = DetectorConfig::default();
    for id in detector_ids() {
        for kind in ["vuln", "safe"] {
            let g = fixture(&format!("{id}.{kind}.sol"));
            let all = run_all(&g, &Budget::default(), &cfg, None).unwrap();
            let summary: Vec<String> = all.iter().map(|f| format!("{}@{}", f.detector, f.code)).collect();
            println!("{id}.{kind}: {summary:?}");
        }
    }
}

#[test]
fn one_millisecond_on_the_deep_chain_engages_the_ladder() {
    let g = build_from_source(&deep_guard(200, 16, false)).unwrap();
    let budget = Budget::default().with_time_limit(Duration::from_millis(1));
    let a = analyze_with_budget(&g, &budget, &DetectorConfig::default(), Some(&selfdestruct_only())).unwrap();
    assert!(!a.complete);
    assert_eq!(a.findings.len(), 1);
    assert!(a.findings.iter().all(|f| !f.complete));
}

#[test]
fn the_guard_holds_under_every_hop_cap() {
    let guarded = build_from_source(&deep_guard(200, 16, true)).unwrap();
    let open = build_from_source(&deep_guard(200, 16, false)).unwrap();
    let ids = selfdestruct_only();
    // the field guard is reachable from msg.sender only through 200+ DFG hops
    for cap in [8, 16, 32, 64] {
        let budget = Budget::default().with_max_hops(Some(cap)).with_ladder(vec![]);
        let cfg = DetectorConfig::default();
        assert!(analyze_with_budget(&guarded, &budget, &cfg, Some(&ids)).unwrap().findings.is_empty(), "cap {cap}");
        assert_eq!(analyze_with_budget(&open, &budget, &cfg, Some(&ids)).unwrap().findings.len(), 1, "cap {cap}");
    }
    let budget = Budget::default().with_time_limit(Duration::from_millis(1));
    let a = analyze_with_budget(&guarded, &budget, &DetectorConfig::default(), Some(&ids)).unwrap();
    assert!(!a.complete);
    assert!(a.findings.is_empty());
}

//! Query engine against the brute-force oracle in `support`.

use std::collections::BTreeSet;
use std::time::Duration;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sodd::cpg::{CpgGraph, EdgeLabel, Label};
use sodd::graphquery::pattern::*;
use sodd::graphquery::{match_pattern, Budget, Cond};

mod support;
use support::query_oracle::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn engine_equals_naive_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 30);
        let p = random_pattern(&mut rng);
        let got = match_pattern(&g, &p, &Budget::default()).unwrap();
        prop_assert!(got.complete);
        prop_assert_eq!(got.bindings, oracle_bindings(&g, &p), "pattern {}", p.to_json());
    }

    #[test]
    fn hop_caps_are_monotone_for_positive_patterns(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_graph(&mut rng, 20);
        let mut p = random_pattern(&mut rng);
        p.filter = Cond::True;
        let mut prev: Option<BTreeSet<_>> = None;
        for k in 1..=6 {
            let b = Budget::default().with_max_hops(Some(k));
            let cur: BTreeSet<_> = match_pattern(&g, &p, &b).unwrap().bindings.into_iter().collect();
            if let Some(prev) = &prev {
                prop_assert!(prev.is_subset(&cur));
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn three_cycle_yields_simple_paths_only() {
    let mut g = CpgGraph::new();
    for _ in 0..3 {
        g.add_node(&[Label::Call]);
    }
    g.add_edge(0, 1, EdgeLabel::Eog);
    g.add_edge(1, 2, EdgeLabel::Eog);
    g.add_edge(2, 0, EdgeLabel::Eog);
    let p = Pattern::new()
        .chain(node("a").out_star(&[EdgeLabel::Eog]).to(node("b")).path("p"))
        .returns(&["a", "b"]);
    let got = match_pattern(&g, &p, &Budget::default()).unwrap();
    // each node reaches the other two; it never revisits itself
    assert_eq!(got.bindings.len(), 6);
    assert!(got.bindings.iter().all(|b| b["a"] != b["b"]));
    let back = Pattern::new()
        .chain(node("a").out_star(&[EdgeLabel::Eog]).to(node("a")))
        .returns(&["a"]);
    assert!(match_pattern(&g, &back, &Budget::default()).unwrap().bindings.is_empty());
}

#[test]
fn the_empty_graph_matches_nothing() {
    let g = CpgGraph::new();
    let p = Pattern::new().chain(node("x")).returns(&["x"]);
    let got = match_pattern(&g, &p, &Budget::default()).unwrap();
    assert!(got.bindings.is_empty());
    assert!(got.complete);
}


#[test]
fn ladder_engages_on_the_deep_chain() {
    let g = deep_chain(40);
    let budget = Budget::default().with_time_limit(Duration::from_millis(300));
    let got = match_pattern(&g, &flow_with_path(), &budget).unwrap();
    assert!(!got.complete);
    let cap = got.hop_cap.expect("a reduced cap finished");
    // every node within `cap` hops of the parameter is reported
    let expected = (1..=cap.min(80)).map(|d| if d % 2 == 0 { 1 } else { 2 }).sum::<u32>();
    assert_eq!(got.bindings.len() as u32, expected);

    let none = Budget::default().with_time_limit(Duration::from_millis(50)).with_ladder(vec![]);
    assert!(match_pattern(&g, &flow_with_path(), &none).is_err());
}

#[test]
fn negated_subqueries_ignore_the_cap() {
    let g = deep_chain(4);
    // a parameter with no path to any field within reach is absent under every cap
    let p = Pattern::new()
        .chain(node("p").label(Label::Param))
        .filter(not(exists(
            Pattern::new().chain(node("p").out_star(&[EdgeLabel::Dfg]).to(anon().label(Label::Field))),
        )))
        .returns(&["p"]);
    let unbounded = match_pattern(&g, &p, &Budget::default()).unwrap().bindings;
    assert!(unbounded.is_empty());
    for cap in [1, 2, 4, 8] {
        let b = Budget::default().with_max_hops(Some(cap));
        assert_eq!(match_pattern(&g, &p, &b).unwrap().bindings, unbounded, "cap {cap}");
    }
}

#[test]
fn patterns_round_trip_through_json() {
    let p = flow_with_path();
    assert_eq!(Pattern::from_json(&p.to_json()).unwrap(), p);
}

#[test]
fn undeclared_variables_are_rejected() {
    let p = Pattern::new().chain(node("x")).filter(differ("x", "nope")).returns(&["x"]);
    assert!(match_pattern(&CpgGraph::new(), &p, &Budget::default()).is_err());
}

fn param_to_field() -> Pattern {
    Pattern::new()
        .chain(
            node("p")
                .label(Label::Param)
                .out_star(&[EdgeLabel::Dfg])
                .to(anon().label(Label::Field)),
        )
        .returns(&["p"])
}

#[test]
fn guarded_withdraw_has_no_parameter_to_field_flow() {
    let g = sodd::cpg::build_from_source(include_str!("fixtures/guarded_withdraw.sol")).unwrap();
    let got = match_pattern(&g, &param_to_field(), &Budget::default()).unwrap();
    assert!(got.bindings.is_empty());
}

#[test]
fn setter_parameter_flows_into_the_field() {
    let g = sodd::cpg::build_from_source("contract C { uint x; function set(uint a){x = a;} }").unwrap();
    let got = match_pattern(&g, &param_to_field(), &Budget::default()).unwrap();
    assert_eq!(got.bindings.len(), 1);
    assert_eq!(g.node(got.bindings[0]["p"]).local_name(), "a");
}

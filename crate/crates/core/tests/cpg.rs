//! Structural properties of parsed snippets and their graphs.

use std::fs;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sodd::cpg::{build_cpg, from_json, to_json, CpgGraph, EdgeLabel, Label};
use sodd::parser::{parse_source, parse_source_strict, Shape};

mod support;
use support::fixtures::{all_fixtures as fixtures, random_contract};


fn build(src: &str) -> CpgGraph {
    build_cpg(&parse_source(src).unwrap()).unwrap()
}

#[test]
fn three_shapes_parse_with_their_wrappers() {
    let contract = "contract Bank {\n    mapping(address => uint) balances;\n    ...\n    function pay() public { balances[msg.sender] += msg.value }\n}";
    let function = "function withdraw(uint amount) public {\n    require(balances[msg.sender] >= amount)\n    ...\n    msg.sender.transfer(amount);\n}";
    let statements = "uint fee = msg.value / 100\n...\nowner.transfer(fee)";

    let cases = [(contract, Shape::Contract, 0, 0), (function, Shape::Function, 1, 0), (statements, Shape::Statement, 1, 1)];
    for (src, shape, records, functions) in cases {
        let ast = parse_source(src).unwrap();
        assert_eq!(ast.shape, shape, "{src}");
        assert_eq!(ast.placeholders_skipped, 1, "{src}");
        let g = build_cpg(&ast).unwrap();
        let inferred = |l: Label| g.nodes().iter().filter(|n| n.has(l) && n.is_inferred() && n.prop("builtin").is_none()).count();
        assert_eq!(inferred(Label::Record), records, "{src}");
        assert_eq!(inferred(Label::Function), functions, "{src}");
        if records == 1 {
            let rec = g.nodes_with(Label::Record).find(|&r| g.node(r).is_inferred()).unwrap();
            let inner = g.ast_subtree(rec);
            assert!(g.nodes_with(Label::Function).all(|f| inner.contains(&f)), "every function sits in the wrapper");
        }
    }
    // The missing semicolons and placeholders are rejected by the strict grammar.
    for src in [contract, function, statements] {
        assert!(parse_source_strict(src).is_err());
    }
}

#[test]
fn strict_valid_fixtures_parse_identically() {
    let mut strict_valid = 0;
    for (name, src) in fixtures() {
        let tolerant = parse_source(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        if let Ok(strict) = parse_source_strict(&src) {
            strict_valid += 1;
            assert_eq!(strict, tolerant, "{name}");
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let src = random_contract(&mut rng);
        let strict = parse_source_strict(&src).unwrap_or_else(|e| panic!("{e}\n{src}"));
        assert_eq!(strict, parse_source(&src).unwrap());
        strict_valid += 1;
    }
    assert!(strict_valid >= 60, "only {strict_valid} strict-valid inputs");
}

#[test]
fn rollback_nodes_are_terminal_everywhere() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let generated: Vec<String> = (0..20).map(|_| random_contract(&mut rng)).collect();
    let mut rollbacks = 0;
    for src in fixtures().into_iter().map(|(_, s)| s).chain(generated) {
        let g = build(&src);
        for rb in g.nodes_with(Label::Rollback) {
            rollbacks += 1;
            assert!(g.eog_successors(rb).is_empty(), "rollback {rb} has successors in\n{src}");
        }
        for call in g.nodes_with(Label::Call) {
            let name = g.node(call).local_name();
            if matches!(name, "require" | "assert" | "revert") && !g.node(call).is_inferred() {
                assert!(
                    g.eog_successors(call).iter().any(|&s| g.node(s).has(Label::Rollback)),
                    "{name} without a rollback branch"
                );
            }
        }
    }
    assert!(rollbacks > 20);
}

#[test]
fn modifier_expansion_injects_the_require() {
    let src = fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/guarded_withdraw.sol")).unwrap();
    let g = build(&src);
    let modifier = g.nodes_with(Label::Modifier).find(|&m| g.node(m).local_name() == "onlyOwner").unwrap();
    let original = g
        .ast_subtree(modifier)
        .into_iter()
        .find(|&n| g.node(n).has(Label::Call) && g.node(n).local_name() == "require")
        .unwrap();
    let wd = g.nodes_with(Label::Function).find(|&f| g.node(f).local_name() == "withdrawAll").unwrap();
    let copy = g
        .ast_subtree(wd)
        .into_iter()
        .find(|&n| g.node(n).has(Label::Call) && g.node(n).local_name() == "require")
        .expect("the body carries a copy of the modifier's require");
    assert_ne!(copy, original);
    assert_eq!(g.node(copy).code(), g.node(original).code());
    // The copy runs before the original body: the call is reachable from it.
    let call = g
        .ast_subtree(wd)
        .into_iter()
        .find(|&n| g.node(n).has(Label::Call) && g.node(n).local_name() == "call")
        .unwrap();
    let mut seen = vec![copy];
    let mut stack = vec![copy];
    while let Some(n) = stack.pop() {
        for s in g.eog_successors(n) {
            if !seen.contains(&s) {
                seen.push(s);
                stack.push(s);
            }
        }
    }
    assert!(seen.contains(&call));
}

#[test]
fn owner_check_order_and_fan_in() {
    let g = build("contract C { address owner; function f() public { if (msg.sender == owner) {} } }");
    let sender = g.find_code(Label::Member, "msg.sender").unwrap();
    let owner = g.nodes_with(Label::Reference).find(|&n| g.node(n).code() == "owner").unwrap();
    let eq = g.find_code(Label::BinaryOperator, "msg.sender == owner").unwrap();
    let iff = g.nodes_with(Label::If).next().unwrap();
    for (a, b) in [(sender, owner), (owner, eq), (eq, iff)] {
        assert_eq!(g.eog_successors(a), vec![b]);
    }
    let mut fan_in = g.sources(eq, EdgeLabel::Dfg);
    fan_in.sort();
    let mut expected = vec![sender, owner];
    expected.sort();
    assert_eq!(fan_in, expected);
}

#[test]
fn json_round_trip_on_random_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let src = random_contract(&mut rng);
        let g = build(&src);
        let text = to_json(&g);
        let back = from_json(&text).unwrap();
        assert_eq!(back.nodes(), g.nodes());
        assert_eq!(back.edges(), g.edges());
        assert_eq!(back.roots, g.roots);
        assert_eq!(to_json(&back), text);
    }
}

//! Source fixtures: the detector corpus, generated contracts and the study
//! corpus.

use std::fs;
use std::path::PathBuf;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sodd::pipeline::{ingest, ContractRecord, Corpus, SnippetRecord};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn detector_fixture(name: &str) -> String {
    let path = fixture_dir().join("detectors").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// `guarded_withdraw.sol` followed by the detector corpus in name order.
pub fn all_fixtures() -> Vec<(String, String)> {
    let root = fixture_dir();
    let mut out = vec![("guarded_withdraw.sol".to_string(), fs::read_to_string(root.join("guarded_withdraw.sol")).unwrap())];
    let mut names: Vec<_> = fs::read_dir(root.join("detectors")).unwrap().map(|e| e.unwrap().path()).collect();
    names.sort();
    for p in names {
        out.push((p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap()));
    }
    out
}

pub const IDENTS: &[&str] = &["a", "b", "total", "owner", "count", "limit"];

/// Random strict-valid contract: fields, a modifier and functions built from
/// a small statement grammar.
pub fn random_contract(rng: &mut ChaCha8Rng) -> String {
    fn expr(rng: &mut ChaCha8Rng, depth: u32) -> String {
        match if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..6) } {
            0 => IDENTS[rng.random_range(0..IDENTS.len())].to_string(),
            1 => rng.random_range(0..1000u32).to_string(),
            2 => "msg.value".to_string(),
            3 => format!("{} + {}", expr(rng, depth - 1), expr(rng, depth - 1)),
            4 => format!("({} * {})", expr(rng, depth - 1), expr(rng, depth - 1)),
            _ => format!("helper({})", expr(rng, depth - 1)),
        }
    }
    fn stmt(rng: &mut ChaCha8Rng, depth: u32) -> String {
        let var = IDENTS[rng.random_range(0..IDENTS.len())];
        match if depth == 0 { rng.random_range(0..3) } else { rng.random_range(0..7) } {
            0 => format!("{var} = {};", expr(rng, 2)),
            1 => format!("require({var} > {});", expr(rng, 1)),
            2 => format!("emit Log({});", expr(rng, 1)),
            3 => format!("if ({var} < {}) {{ {} }} else {{ {} }}", expr(rng, 1), stmt(rng, depth - 1), stmt(rng, depth - 1)),
            4 => format!("for (uint i = 0; i < {var}; i++) {{ {} }}", stmt(rng, depth - 1)),
            5 => format!("while ({var} > 0) {{ {var} -= 1; {} }}", stmt(rng, depth - 1)),
            _ => format!("if ({var} == 0) {{ revert(); }}"),
        }
    }
    let mut s = String::from("pragma solidity ^0.8.0;\ncontract Random {\n");
    for f in IDENTS {
        s.push_str(&format!("    uint {f};\n"));
    }
    s.push_str("    event Log(uint v);\n");
    s.push_str("    modifier guarded() { require(msg.sender != address(0)); _; }\n");
    s.push_str("    function helper(uint v) internal pure returns (uint) { return v + 1; }\n");
    for k in 0..rng.random_range(1..5) {
        let modifier = if rng.random_bool(0.5) { " guarded" } else { "" };
        s.push_str(&format!("    function f{k}(uint a, uint b) public payable{modifier} {{\n"));
        for _ in 0..rng.random_range(1..6) {
            s.push_str(&format!("        {}\n", stmt(rng, 2)));
        }
        s.push_str("    }\n");
    }
    s.push_str("}\n");
    s
}

/// `kill` is guarded (or not) by a field that `msg.sender` reaches only through
/// a `hops`-long DFG chain in `setup`; the branches in `setup` make unbounded
/// path enumeration expensive.
pub fn deep_guard(hops: usize, branches: usize, guard: bool) -> String {
    let mut setup = String::from("address s0 = msg.sender; ");
    for i in 1..hops {
        setup.push_str(&format!("address s{i} = s{}; ", i - 1));
    }
    setup.push_str(&format!("guardian = s{}; ", hops - 1));
    for _ in 0..branches {
        setup.push_str("if (x == 1) { x = 2; } else { x = 3; } ");
    }
    let check = if guard { "require(guardian == owner); " } else { "" };
    format!(
        "contract Deep {{ address owner; address guardian; uint x; function setup() public {{ {setup}}} function kill() public {{ {check}selfdestruct(msg.sender); }} }}"
    )
}

pub fn selfdestruct_only() -> Vec<String> {
    vec!["access-control-selfdestruct".to_string()]
}

pub fn study_dir() -> PathBuf {
    fixture_dir().join("study")
}

pub fn mini_corpus() -> (Vec<SnippetRecord>, Vec<ContractRecord>) {
    let s: Corpus<SnippetRecord> = ingest(&study_dir().join("snippets.jsonl")).unwrap();
    let c: Corpus<ContractRecord> = ingest(&study_dir().join("contracts.jsonl")).unwrap();
    assert!(s.diagnostics.is_empty() && c.diagnostics.is_empty());
    (s.records, c.records)
}

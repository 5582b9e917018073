use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use rayon::prelude::*;
use serde_json::json;
use sodd::clone::{fingerprint_source, read_fingerprints, write_fingerprints, CloneError, Fingerprint, NgramIndex};
use sodd::cpg::{build_from_source, to_dot, to_json};
use sodd::detectors::{analyze_with_budget, DetectorConfig, DetectorError};
use sodd::graphquery::QueryError;
use sodd::parser::{parse_source, AstNode, SnippetAst};
use sodd::pipeline::{ingest, render_text, run_study, spearman, Corpus, Permutation, StudyConfig};
use walkdir::WalkDir;

use crate::output::{category_counts, sarif, text_summary, text_table, FindingRecord};
use crate::{Config, Failure, Format};

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::usage)
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| if text.ends_with('\n') { Ok(()) } else { out.write_all(b"\n") })
        .context("writing to stdout")
        .map_err(Failure::usage)
}

fn unsupported(command: &str, format: Format) -> Failure {
    Failure::usage(anyhow!("`{command}` does not support --format {format:?}"))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build().map_err(Failure::usage)
}

/// Files named directly plus every `.sol` file below named directories, sorted.
fn source_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in WalkDir::new(p) {
                let entry = entry.map_err(Failure::usage)?;
                if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "sol") {
                    out.push(entry.into_path());
                }
            }
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(Failure::usage(anyhow!("{}: no such file or directory", p.display())));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

fn clone_failure(e: CloneError) -> Failure {
    match e {
        CloneError::Parse(_) | CloneError::InvalidFingerprint(_) | CloneError::DuplicateId(_) => Failure::parse(e),
        CloneError::Storage(_) => Failure::parse(e),
        _ => Failure::usage(e),
    }
}

fn ast_text(ast: &SnippetAst) -> String {
    fn walk(ast: &SnippetAst, n: &AstNode, depth: usize, out: &mut String) {
        let name = n.name().map(|s| format!(" {s}")).unwrap_or_default();
        let text: String = ast.node_text(n).split_whitespace().collect::<Vec<_>>().join(" ");
        let text = if text.chars().count() > 60 { format!("{}...", text.chars().take(57).collect::<String>()) } else { text };
        out.push_str(&format!("{}{:?}{name}  `{text}`\n", "  ".repeat(depth), n.kind));
        for c in &n.children {
            walk(ast, c, depth + 1, out);
        }
    }
    let mut out = format!("shape {:?}, {} placeholders skipped\n", ast.shape, ast.placeholders_skipped);
    for r in &ast.roots {
        walk(ast, r, 0, &mut out);
    }
    out
}

pub fn parse(file: &Path, config: &Config) -> Result<(), Failure> {
    let ast = parse_source(&read(file)?).map_err(Failure::parse)?;
    match config.format {
        Format::Json => emit(&ast.to_json()),
        Format::Text => emit(&ast_text(&ast)),
        f => Err(unsupported("parse", f)),
    }
}

pub fn cpg(file: &Path, config: &Config) -> Result<(), Failure> {
    let g = build_from_source(&read(file)?).map_err(Failure::parse)?;
    match config.format {
        Format::Json => emit(&to_json(&g)),
        Format::Dot => emit(&to_dot(&g)),
        Format::Text => emit(&format!("{} nodes, {} edges\n", g.node_count(), g.edge_count())),
        f => Err(unsupported("cpg", f)),
    }
}

enum ScanOutcome {
    Findings(Vec<FindingRecord>),
    Failed(Failure),
}

fn scan_file(path: &Path, config: &Config) -> ScanOutcome {
    let name = path.display().to_string();
    let code = match read(path) {
        Ok(c) => c,
        Err(f) => return ScanOutcome::Failed(f),
    };
    let g = match build_from_source(&code) {
        Ok(g) => g,
        Err(e) => return ScanOutcome::Failed(Failure::parse(anyhow!("{name}: {e}"))),
    };
    match analyze_with_budget(&g, &config.budget, &DetectorConfig::default(), config.detectors.as_deref()) {
        Ok(a) => ScanOutcome::Findings(a.findings.iter().map(|f| FindingRecord::new(&name, f)).collect()),
        Err(e @ DetectorError::Query { source: QueryError::BudgetExhausted { .. }, .. }) => {
            ScanOutcome::Failed(Failure::budget(anyhow!("{name}: {e}")))
        }
        Err(e) => ScanOutcome::Failed(Failure::usage(anyhow!("{name}: {e}"))),
    }
}

/// Findings are written for every file that could be analyzed; the exit code
/// is the highest among the files that could not.
pub fn scan(paths: &[PathBuf], summary: bool, config: &Config) -> Result<(), Failure> {
    let files = source_files(paths)?;
    let outcomes: Vec<ScanOutcome> = pool(config.jobs)?.install(|| files.par_iter().map(|f| scan_file(f, config)).collect());
    let mut records = Vec::new();
    let mut worst: Option<Failure> = None;
    let mut failed = Vec::new();
    for o in outcomes {
        match o {
            ScanOutcome::Findings(r) => records.extend(r),
            ScanOutcome::Failed(f) => {
                eprintln!("sodd: {:#}", f.error);
                failed.push(format!("{:#}", f.error));
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));

    let rendered = if summary {
        match config.format {
            Format::Json => serde_json::to_string_pretty(&json!({
                "files": files.len(),
                "analyzed": files.len() - failed.len(),
                "findings": records.len(),
                "categories": category_counts(&records),
                "failures": failed,
            }))
            .expect("summary serializes"),
            Format::Text => text_summary(&records, files.len() - failed.len()),
            f => return Err(unsupported("scan --summary", f)),
        }
    } else {
        match config.format {
            Format::Json => records
                .iter()
                .map(|r| serde_json::to_string(r).expect("record serializes") + "\n")
                .collect(),
            Format::Text => text_table(&records, files.len() - failed.len()),
            Format::Sarif => serde_json::to_string_pretty(&sarif(&records)).expect("sarif serializes"),
            f => return Err(unsupported("scan", f)),
        }
    };
    if !rendered.is_empty() {
        emit(&rendered)?;
    }
    match worst {
        Some(mut f) => {
            f.error = anyhow!("{} of {} files could not be analyzed", failed.len(), files.len());
            Err(f)
        }
        None => Ok(()),
    }
}

pub fn fingerprint(paths: &[PathBuf], config: &Config) -> Result<(), Failure> {
    if config.format != Format::Json && config.format != Format::Text {
        return Err(unsupported("fingerprint", config.format));
    }
    let files = source_files(paths)?;
    let results: Vec<(String, Result<Fingerprint, Failure>)> = pool(config.jobs)?.install(|| {
        files
            .par_iter()
            .map(|f| {
                let id = f.display().to_string();
                let fp = read(f).and_then(|code| fingerprint_source(id.clone(), &code).map_err(clone_failure));
                (id, fp)
            })
            .collect()
    });
    let mut fps = Vec::new();
    let mut worst: Option<Failure> = None;
    for (id, r) in results {
        match r {
            Ok(fp) => fps.push(fp),
            Err(f) => {
                eprintln!("sodd: {id}: {:#}", f.error);
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    let mut out = io::stdout().lock();
    write_fingerprints(&mut out, &fps).map_err(Failure::usage)?;
    worst.map_or(Ok(()), Err)
}

pub fn index(fingerprints: &Path, index: &Path, config: &Config) -> Result<(), Failure> {
    let file = fs::File::open(fingerprints).with_context(|| format!("opening {}", fingerprints.display())).map_err(Failure::usage)?;
    let fps = read_fingerprints(BufReader::new(file)).map_err(clone_failure)?;
    let mut idx = NgramIndex::new(config.clone.ngram).map_err(Failure::usage)?;
    let count = fps.len();
    for fp in fps {
        idx.add(fp).map_err(clone_failure)?;
    }
    idx.persist(index).map_err(Failure::usage)?;
    let text = match config.format {
        Format::Json => json!({ "index": index.display().to_string(), "fingerprints": count, "ngram": idx.n() }).to_string(),
        Format::Text => format!("indexed {count} fingerprints ({}-grams) into {}", idx.n(), index.display()),
        f => return Err(unsupported("index", f)),
    };
    emit(&text)
}

pub fn match_snippet(snippet: &Path, index: &Path, fingerprinted: bool, config: &Config) -> Result<(), Failure> {
    let idx = NgramIndex::load(index).map_err(clone_failure)?;
    // The index's own n-gram length is authoritative.
    let params = sodd::clone::CloneParams { ngram: idx.n(), ..config.clone };
    let queries = if fingerprinted {
        let file = fs::File::open(snippet).with_context(|| format!("opening {}", snippet.display())).map_err(Failure::usage)?;
        read_fingerprints(BufReader::new(file)).map_err(clone_failure)?
    } else {
        vec![fingerprint_source(snippet.display().to_string(), &read(snippet)?).map_err(clone_failure)?]
    };
    let mut text = String::new();
    for q in &queries {
        let matches = idx.match_fingerprint(q, &params).map_err(Failure::usage)?;
        match config.format {
            Format::Json => {
                text.push_str(&json!({ "snippet": q.source_id, "matches": matches }).to_string());
                text.push('\n');
            }
            Format::Text => {
                text.push_str(&format!("{} ({} matches)\n", q.source_id, matches.len()));
                for m in &matches {
                    text.push_str(&format!("  {:<40} epsilon={:>6.2} overlap={:.3}\n", m.candidate_id, m.epsilon, m.eta_overlap));
                }
            }
            f => return Err(unsupported("match", f)),
        }
    }
    emit(&text)
}

fn warn_diagnostics<T>(path: &Path, corpus: &Corpus<T>) {
    for d in &corpus.diagnostics {
        eprintln!("sodd: {}:{}: {}", path.display(), d.line, d.message);
    }
}

pub fn study(snippets: &Path, contracts: &Path, report_path: Option<&Path>, config: &Config) -> Result<(), Failure> {
    let s = ingest(snippets).map_err(Failure::usage)?;
    let c = ingest(contracts).map_err(Failure::usage)?;
    warn_diagnostics(snippets, &s);
    warn_diagnostics(contracts, &c);
    let study_config = StudyConfig {
        clone: config.clone,
        budget: config.budget.clone(),
        detectors: DetectorConfig::default(),
        restrict: config.detectors.clone(),
        keywords: config.keywords.clone(),
        jobs: config.jobs,
        seed: config.seed,
    };
    let report = run_study(&s.records, &c.records, &study_config).map_err(Failure::usage)?;
    let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(p) = report_path {
        fs::write(p, &report_json).with_context(|| format!("writing {}", p.display())).map_err(Failure::usage)?;
    }
    match config.format {
        Format::Json => emit(&report_json),
        Format::Text => emit(&render_text(&report)),
        f => Err(unsupported("study", f)),
    }
}

/// Two numeric columns separated by commas, tabs or spaces; `#` comments and
/// a non-numeric header line are skipped.
fn read_pairs(text: &str) -> Result<Vec<(f64, f64)>, Failure> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite())).collect();
        match parsed {
            Some(v) if v.len() == 2 => out.push((v[0], v[1])),
            None if out.is_empty() && n == 0 => continue,
            _ => return Err(Failure::parse(anyhow!("line {}: expected two numbers, got `{line}`", n + 1))),
        }
    }
    Ok(out)
}

pub fn stats(pairs: &Path, config: &Config) -> Result<(), Failure> {
    let data = read_pairs(&read(pairs)?)?;
    let r = spearman(&data, config.seed.map(Permutation::new)).map_err(Failure::parse)?;
    match config.format {
        Format::Json => emit(&serde_json::to_string_pretty(&r).expect("result serializes")),
        Format::Text => {
            let perm = r.permutation_p_value.map(|p| format!(" permutation_p={p:.4}")).unwrap_or_default();
            emit(&format!("n={} rho={} p={:.6}{perm}", r.n, r.rho, r.p_value))
        }
        f => Err(unsupported("stats", f)),
    }
}

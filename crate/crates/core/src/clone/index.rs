//! Inverted n-gram index over fingerprint texts, used to prefilter
//! candidates before edit-distance scoring.
//!
//! Queries take `&self` and may run concurrently; `add`/`remove` need
//! exclusive access.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{epsilon, CloneError, CloneParams, Fingerprint, MatchResult};

const FORMAT: &str = "sodd-ngram-index";
const VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct NgramIndex {
    n: usize,
    /// Slot → fingerprint; removed slots stay `None` so postings keep their order.
    store: Vec<Option<Fingerprint>>,
    slots: HashMap<String, u32>,
    /// Sorted, duplicate-free slot lists.
    postings: HashMap<Box<str>, Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub id: String,
    /// Fraction of the query's distinct n-grams present in the candidate.
    pub overlap: f64,
}

#[derive(Serialize, Deserialize)]
struct Persisted {
    format: String,
    version: u32,
    n: usize,
    fingerprints: Vec<Fingerprint>,
}

/// Distinct character n-grams, separators included.
pub fn ngrams(text: &str, n: usize) -> HashSet<&str> {
    if n == 0 || text.len() < n {
        return HashSet::new();
    }
    (0..=text.len() - n).filter_map(|i| text.get(i..i + n)).collect()
}

impl NgramIndex {
    pub fn new(n: usize) -> Result<Self, CloneError> {
        if n == 0 {
            return Err(CloneError::InvalidParams("n-gram size must be positive".into()));
        }
        Ok(NgramIndex { n, store: Vec::new(), slots: HashMap::new(), postings: HashMap::new() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Fingerprint> {
        self.slots.get(id).and_then(|&s| self.store[s as usize].as_ref())
    }

    /// Stored fingerprints in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Fingerprint> {
        self.store.iter().flatten()
    }

    pub fn add(&mut self, fp: Fingerprint) -> Result<(), CloneError> {
        if self.slots.contains_key(&fp.source_id) {
            return Err(CloneError::DuplicateId(fp.source_id));
        }
        let slot = u32::try_from(self.store.len()).map_err(|_| CloneError::Storage("index is full".into()))?;
        for g in ngrams(&fp.text, self.n) {
            self.postings.entry(g.into()).or_default().push(slot);
        }
        self.slots.insert(fp.source_id.clone(), slot);
        self.store.push(Some(fp));
        Ok(())
    }

    pub fn remove(&mut self, id: &str) -> Result<Fingerprint, CloneError> {
        let slot = self.slots.remove(id).ok_or_else(|| CloneError::MissingId(id.to_string()))?;
        let fp = self.store[slot as usize].take().expect("slot map and store agree");
        for g in ngrams(&fp.text, self.n) {
            if let Some(list) = self.postings.get_mut(g) {
                if let Ok(i) = list.binary_search(&slot) {
                    list.remove(i);
                }
                if list.is_empty() {
                    self.postings.remove(g);
                }
            }
        }
        Ok(fp)
    }

    /// Ids in the posting list of one n-gram.
    pub fn posting(&self, gram: &str) -> Vec<&str> {
        self.postings
            .get(gram)
            .map(|l| l.iter().filter_map(|&s| self.store[s as usize].as_ref()).map(|f| f.source_id.as_str()).collect())
            .unwrap_or_default()
    }

    /// Stored fingerprints holding at least `eta` of the query's distinct
    /// n-grams, in insertion order. A query shorter than one n-gram matches
    /// the fingerprints containing it verbatim.
    pub fn query(&self, fp: &Fingerprint, eta: f64) -> Vec<Candidate> {
        let grams = ngrams(&fp.text, self.n);
        if grams.is_empty() {
            return self
                .iter()
                .filter(|s| eta <= 0.0 || s.text.contains(&fp.text))
                .map(|s| Candidate {
                    id: s.source_id.clone(),
                    overlap: if s.text.contains(&fp.text) { 1.0 } else { 0.0 },
                })
                .collect();
        }
        let mut hits = vec![0u32; self.store.len()];
        for g in &grams {
            for &s in self.postings.get(*g).map_or(&[][..], Vec::as_slice) {
                hits[s as usize] += 1;
            }
        }
        let total = grams.len() as f64;
        self.store
            .iter()
            .zip(hits)
            .filter_map(|(s, h)| {
                let s = s.as_ref()?;
                let overlap = f64::from(h) / total;
                (overlap >= eta).then(|| Candidate { id: s.source_id.clone(), overlap })
            })
            .collect()
    }

    /// Prefilters, then scores survivors with ε; keeps those at or above the
    /// ε threshold, best first, ties by id.
    pub fn match_fingerprint(&self, fp: &Fingerprint, params: &CloneParams) -> Result<Vec<MatchResult>, CloneError> {
        params.validate()?;
        let candidates = self.query(fp, params.eta);
        let scored: Result<Vec<Option<MatchResult>>, CloneError> = candidates
            .par_iter()
            .map(|c| {
                let stored = self.get(&c.id).expect("candidate is stored");
                let e = epsilon(fp, stored)?;
                Ok((e >= params.epsilon).then(|| MatchResult {
                    candidate_id: c.id.clone(),
                    epsilon: e,
                    eta_overlap: c.overlap,
                }))
            })
            .collect();
        let mut out: Vec<MatchResult> = scored?.into_iter().flatten().collect();
        out.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon).then_with(|| a.candidate_id.cmp(&b.candidate_id)));
        Ok(out)
    }

    pub fn to_writer(&self, writer: impl Write) -> Result<(), CloneError> {
        let p = Persisted {
            format: FORMAT.into(),
            version: VERSION,
            n: self.n,
            fingerprints: self.iter().cloned().collect(),
        };
        serde_json::to_writer(writer, &p).map_err(|e| CloneError::Storage(e.to_string()))
    }

    pub fn from_reader(reader: impl Read) -> Result<Self, CloneError> {
        let p: Persisted = serde_json::from_reader(reader).map_err(|e| CloneError::Storage(e.to_string()))?;
        if p.format != FORMAT || p.version != VERSION {
            return Err(CloneError::Storage(format!(
                "unsupported index layout {} v{} (expected {FORMAT} v{VERSION})",
                p.format, p.version
            )));
        }
        let mut idx = NgramIndex::new(p.n)?;
        for fp in p.fingerprints {
            idx.add(fp)?;
        }
        Ok(idx)
    }

    pub fn persist(&self, path: &Path) -> Result<(), CloneError> {
        let file = std::fs::File::create(path).map_err(|e| CloneError::Storage(format!("{}: {e}", path.display())))?;
        let mut w = std::io::BufWriter::new(file);
        self.to_writer(&mut w)?;
        w.flush().map_err(|e| CloneError::Storage(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CloneError> {
        let file = std::fs::File::open(path).map_err(|e| CloneError::Storage(format!("{}: {e}", path.display())))?;
        Self::from_reader(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(id: &str, text: &str) -> Fingerprint {
        Fingerprint::new(id, text).unwrap()
    }

    fn sample() -> NgramIndex {
        let mut idx = NgramIndex::new(3).unwrap();
        idx.add(fp("a", ":AB.CDEFG")).unwrap();
        idx.add(fp("b", ".CDEFG.HIJ")).unwrap();
        idx.add(fp("c", ".zzzz")).unwrap();
        idx
    }

    #[test]
    fn self_query_overlaps_fully() {
        let idx = sample();
        let q = idx.get("a").unwrap().clone();
        let hit = idx.query(&q, 1.0);
        assert_eq!(hit, [Candidate { id: "a".into(), overlap: 1.0 }]);
    }

    #[test]
    fn zero_threshold_returns_everything() {
        let idx = sample();
        assert_eq!(idx.query(&fp("q", ".QQQQ"), 0.0).len(), 3);
        assert!(idx.query(&fp("q", ".QQQQ"), 0.01).is_empty());
    }

    #[test]
    fn short_queries_fall_back_to_substrings() {
        let idx = sample();
        let ids: Vec<String> = idx.query(&fp("q", ".C"), 0.5).into_iter().map(|c| c.id).collect();
        assert_eq!(ids, ["a", "b"]);
    }

    #[test]
    fn removal_clears_postings() {
        let mut idx = sample();
        idx.remove("b").unwrap();
        assert!(idx.postings.values().all(|l| !l.contains(&1)));
        assert!(idx.posting(".HI").is_empty());
        assert_eq!(idx.posting("CDE"), ["a"]);
        assert!(matches!(idx.remove("b"), Err(CloneError::MissingId(_))));
        assert!(matches!(idx.add(fp("a", ".x")), Err(CloneError::DuplicateId(_))));
    }

    #[test]
    fn rejects_foreign_layouts() {
        let bad = r#"{"format":"other","version":1,"n":3,"fingerprints":[]}"#;
        assert!(matches!(NgramIndex::from_reader(bad.as_bytes()), Err(CloneError::Storage(_))));
    }
}

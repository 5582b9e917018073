//! Edit-distance and similarity oracles, and fingerprint generators.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sodd::clone::{Fingerprint, NgramIndex, Segment, SegmentKind, ALPHABET};

/// Textbook dynamic-programming edit distance over chars.
pub fn dp_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let sub = table[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = sub.min(table[i - 1][j] + 1).min(table[i][j - 1] + 1);
        }
    }
    table[a.len()][b.len()]
}

pub fn dp_delta(a: &str, b: &str) -> f64 {
    let m = a.chars().count().max(b.chars().count());
    (m - dp_distance(a, b)) as f64 * 100.0 / m as f64
}

/// Direct evaluation of the order-independent score, independent of the
/// library's sub-fingerprint splitting.
pub fn oracle_epsilon(f1: &str, f2: &str) -> f64 {
    let split = |s: &str| -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = String::new();
        for c in s.chars() {
            if c == '.' || c == ':' {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            } else {
                cur.push(c);
            }
        }
        if !cur.is_empty() {
            out.push(cur);
        }
        out
    };
    let (s1, s2) = (split(f1), split(f2));
    let mut maxima: Vec<f64> = s1
        .iter()
        .map(|a| s2.iter().map(|b| dp_delta(a, b)).fold(0.0, f64::max))
        .collect();
    maxima.sort_by(f64::total_cmp);
    maxima.iter().sum::<f64>() / maxima.len() as f64
}

pub fn random_string(rng: &mut ChaCha8Rng, alphabet: &[u8], max_len: usize) -> String {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| char::from(alphabet[rng.random_range(0..alphabet.len())])).collect()
}

/// Fingerprint text with a header and 1..=6 function segments.
pub fn random_fingerprint(rng: &mut ChaCha8Rng, id: usize) -> Fingerprint {
    let mut text = format!(":{}", random_string(rng, ALPHABET, 4));
    for _ in 0..rng.random_range(1..=6) {
        text.push('.');
        text.push_str(&random_string(rng, ALPHABET, 40));
    }
    Fingerprint::new(format!("fp{id:05}"), text).unwrap()
}

pub fn store(fps: &[Fingerprint], n: usize) -> NgramIndex {
    let mut idx = NgramIndex::new(n).unwrap();
    for fp in fps {
        idx.add(fp.clone()).unwrap();
    }
    idx
}

/// Token-level generator: segments drawn from a skewed vocabulary, so common
/// tokens (and their characters) dominate as they do in real code.
pub struct Corpus {
    rng: ChaCha8Rng,
    vocab: Vec<String>,
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Corpus { rng: ChaCha8Rng::seed_from_u64(seed), vocab: (0..400).map(|i| format!("tok{i}")).collect() }
    }

    pub fn token(&mut self) -> String {
        // squaring a uniform draw favours low indices
        let u: f64 = self.rng.random();
        self.vocab[((u * u) * self.vocab.len() as f64) as usize].clone()
    }

    pub fn segments(&mut self) -> Vec<Segment> {
        let mut segs = vec![Segment { kind: SegmentKind::Header, tokens: vec!["contract".into(), "c".into()] }];
        for _ in 0..self.rng.random_range(1..=5) {
            let len = self.rng.random_range(8..=40);
            let tokens = (0..len).map(|_| self.token()).collect();
            segs.push(Segment { kind: SegmentKind::Function, tokens });
        }
        segs
    }

    /// A near-miss copy: a few token substitutions, insertions and
    /// deletions per function, and shuffled function order.
    pub fn mutate(&mut self, segs: &[Segment]) -> Vec<Segment> {
        let mut out = vec![segs[0].clone()];
        let mut funcs: Vec<Segment> = segs[1..].to_vec();
        for s in &mut funcs {
            let edits = (s.tokens.len() / 12).max(1);
            for _ in 0..edits {
                let at = self.rng.random_range(0..s.tokens.len());
                match self.rng.random_range(0..3) {
                    0 => s.tokens[at] = self.token(),
                    1 => s.tokens.insert(at, self.token()),
                    _ if s.tokens.len() > 1 => {
                        s.tokens.remove(at);
                    }
                    _ => {}
                }
            }
        }
        funcs.shuffle(&mut self.rng);
        out.extend(funcs);
        out
    }
}

//! Collapsing records whose code differs only in comments.

use std::collections::{BTreeMap, HashMap};

use super::Dated;

#[derive(Debug, Clone, PartialEq)]
pub struct Deduped<T> {
    /// Representatives, in the input order of their first member.
    pub records: Vec<T>,
    /// Dropped id → representative id.
    pub merged: BTreeMap<String, String>,
}

/// Removes `//` and `/* */` comments, leaving string literals intact.
pub fn strip_comments(code: &str) -> String {
    let b = code.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            q @ (b'"' | b'\'') => {
                let start = i;
                i += 1;
                while i < b.len() && b[i] != q {
                    i += if b[i] == b'\\' { 2 } else { 1 };
                }
                i = (i + 1).min(b.len());
                out.extend_from_slice(&b[start..i]);
            }
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                i += 2;
                while i < b.len() && !(b[i] == b'*' && b.get(i + 1) == Some(&b'/')) {
                    i += 1;
                }
                i = (i + 2).min(b.len());
            }
            c => {
                out.push(c);
                i += 1;
            }
        }
    }
    // only whole ASCII comment delimiters were removed, so UTF-8 is intact
    String::from_utf8(out).expect("comment stripping preserves UTF-8")
}

/// Keeps, per comment-stripped text, the record with the earliest timestamp
/// (ties: first in input order).
pub fn dedup<T: Dated + Clone>(records: &[T]) -> Deduped<T> {
    let mut groups: HashMap<String, usize> = HashMap::new();
    let mut order: Vec<Vec<usize>> = Vec::new();
    for (i, r) in records.iter().enumerate() {
        let key = strip_comments(r.code());
        match groups.get(&key) {
            Some(&g) => order[g].push(i),
            None => {
                groups.insert(key, order.len());
                order.push(vec![i]);
            }
        }
    }
    let mut out = Deduped { records: Vec::new(), merged: BTreeMap::new() };
    for members in order {
        let rep = *members
            .iter()
            .min_by_key(|&&i| (records[i].timestamp(), i))
            .expect("groups are non-empty");
        for &m in &members {
            if m != rep {
                out.merged.insert(records[m].id().to_string(), records[rep].id().to_string());
            }
        }
        out.records.push(records[rep].clone());
    }
    out
}

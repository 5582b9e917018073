//! Sub-fingerprint similarity and the order-independent fingerprint score.

use super::{CloneError, Fingerprint};

/// `100 · (m − d) / m` where `d` is the Levenshtein distance and `m` the
/// longer length.
pub fn delta(a: &str, b: &str) -> Result<f64, CloneError> {
    if a.is_empty() || b.is_empty() {
        return Err(CloneError::EmptyInput);
    }
    let longest = a.chars().count().max(b.chars().count());
    let d = strsim::levenshtein(a, b);
    Ok((longest - d) as f64 * 100.0 / longest as f64)
}

/// Mean over the query's sub-fingerprints of their best δ against any of the
/// candidate's. Containment-oriented: a query wholly present in a larger
/// candidate scores 100, the reverse need not.
pub fn epsilon(query: &Fingerprint, candidate: &Fingerprint) -> Result<f64, CloneError> {
    let qs = query.subfingerprints();
    let cs = candidate.subfingerprints();
    if qs.is_empty() || cs.is_empty() {
        return Err(CloneError::EmptyFingerprint);
    }
    let mut best: Vec<f64> = qs
        .iter()
        .map(|q| cs.iter().map(|c| delta(q, c).expect("sub-fingerprints are non-empty")).fold(0.0, f64::max))
        .collect();
    // summation order fixed so that permuting the query's segments is exact
    best.sort_by(f64::total_cmp);
    Ok(best.iter().sum::<f64>() / best.len() as f64)
}

/// Both directions averaged.
pub fn epsilon_symmetric(a: &Fingerprint, b: &Fingerprint) -> Result<f64, CloneError> {
    Ok((epsilon(a, b)? + epsilon(b, a)?) / 2.0)
}

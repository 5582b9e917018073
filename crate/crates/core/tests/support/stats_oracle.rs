//! Rank-correlation oracles.

/// Pearson correlation of O(n²) mid-ranks.
pub fn oracle_rho(pairs: &[(f64, f64)]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        v.iter()
            .map(|&x| {
                let below = v.iter().filter(|&&y| y < x).count() as f64;
                let equal = v.iter().filter(|&&y| y == x).count() as f64;
                below + (equal + 1.0) / 2.0
            })
            .collect()
    }
    let x = ranks(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let y = ranks(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Classical formula, valid without ties.
pub fn oracle_rho_no_ties(pairs: &[(f64, f64)]) -> f64 {
    let rank = |v: Vec<f64>| -> Vec<f64> { v.iter().map(|&x| 1.0 + v.iter().filter(|&&y| y < x).count() as f64).collect() };
    let x = rank(pairs.iter().map(|p| p.0).collect());
    let y = rank(pairs.iter().map(|p| p.1).collect());
    let n = x.len() as f64;
    let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

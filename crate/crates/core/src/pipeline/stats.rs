//! Spearman rank correlation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub n: usize,
    pub rho: f64,
    /// Two-sided, from the t approximation with n − 2 degrees of freedom.
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permutation_p_value: Option<f64>,
    pub variables: String,
}

/// Optional seeded permutation test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Permutation {
    pub shuffles: usize,
    pub seed: u64,
}

impl Permutation {
    pub fn new(seed: u64) -> Self {
        Permutation { shuffles: 10_000, seed }
    }
}

/// 1-based ranks; tied values share the mean of their positions.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// ρ over `(v, nr)` pairs with a t-approximation p-value and, when asked, a
/// permutation p-value `(1 + #{|ρ*| ≥ |ρ|}) / (1 + shuffles)`.
pub fn spearman(pairs: &[(f64, f64)], permutation: Option<Permutation>) -> Result<CorrelationResult, PipelineError> {
    let n = pairs.len();
    if n < 3 {
        return Err(PipelineError::TooFewSamples(n));
    }
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    if xs.iter().all(|&x| x == xs[0]) || ys.iter().all(|&y| y == ys[0]) {
        return Err(PipelineError::DegenerateSample);
    }
    let (rx, ry) = (average_ranks(&xs), average_ranks(&ys));
    let rho = pearson(&rx, &ry);
    let p_value = if rho.abs() >= 1.0 {
        0.0
    } else {
        let df = (n - 2) as f64;
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    let permutation_p_value = permutation.map(|perm| {
        let mut rng = ChaCha8Rng::seed_from_u64(perm.seed);
        let mut shuffled = ry.clone();
        let observed = rho.abs() - 1e-12;
        let hits = (0..perm.shuffles)
            .filter(|_| {
                shuffled.shuffle(&mut rng);
                pearson(&rx, &shuffled).abs() >= observed
            })
            .count();
        (hits + 1) as f64 / (perm.shuffles + 1) as f64
    });
    Ok(CorrelationResult { n, rho, p_value, permutation_p_value, variables: "views v vs. containing contracts nr".into() })
}

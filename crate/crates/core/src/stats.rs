//! Paired significance testing: Wilcoxon signed-rank and Bonferroni.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Smallest sample accepted by [`wilcoxon_signed_rank`].
pub const MIN_PAIRS: usize = 5;
/// Largest number of non-zero differences handled with the exact null
/// distribution.
pub const EXACT_MAX: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WilcoxonResult {
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub p_value: f64,
    pub exact: bool,
}

/// Two-sided paired Wilcoxon signed-rank test on `a − b`.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < MIN_PAIRS {
        return Err(Error::InvalidArgument(format!(
            "signed-rank test needs at least {MIN_PAIRS} pairs, got {}",
            a.len()
        )));
    }
    Ok(wilcoxon_signed_rank_detailed(a, b)?.p_value)
}

/// Same test without the minimum-size guard, with the test statistic.
pub fn wilcoxon_signed_rank_detailed(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let mut diffs: Vec<f64> = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if !d.is_finite() {
            return Err(Error::NonFinite("paired difference"));
        }
        if d != 0.0 {
            diffs.push(d);
        }
    }
    if diffs.is_empty() {
        return Err(Error::AllZeroDifferences);
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let n = diffs.len();

    // Average ranks over ties in |d|; kept doubled so they stay integral.
    let mut doubled_ranks = vec![0usize; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        for r in &mut doubled_ranks[i..=j] {
            *r = i + j + 2;
        }
        i = j + 1;
    }
    let w2_plus: usize = diffs
        .iter()
        .zip(&doubled_ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let w_plus = w2_plus as f64 / 2.0;

    if n <= EXACT_MAX {
        let total: usize = doubled_ranks.iter().sum();
        // counts[s] = number of sign assignments with doubled W⁺ = s
        let mut counts = vec![0.0f64; total + 1];
        counts[0] = 1.0;
        for &r in &doubled_ranks {
            for s in (r..=total).rev() {
                counts[s] += counts[s - r];
            }
        }
        let all = 2f64.powi(n as i32);
        let lower: f64 = counts[..=w2_plus.min(total - w2_plus)].iter().sum();
        let p = (2.0 * lower / all).min(1.0);
        return Ok(WilcoxonResult {
            w_plus,
            n,
            p_value: p,
            exact: true,
        });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let dev = (w_plus - mean).abs();
    let z = ((dev - 0.5).max(0.0)) / var.sqrt();
    let normal = Normal::standard();
    let p = (2.0 * (1.0 - normal.cdf(z))).min(1.0);
    Ok(WilcoxonResult {
        w_plus,
        n,
        p_value: p,
        exact: false,
    })
}

/// Significance decisions `p_i < α / m`.
pub fn bonferroni(pvals: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvals.len() as f64;
    pvals.iter().map(|&p| p < alpha / m).collect()
}

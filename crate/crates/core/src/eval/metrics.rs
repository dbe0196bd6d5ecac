use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{ensure, AresError, Result};

/// Area under the ROC curve: the probability that a random anomaly
/// (`labels[i] == true`) outscores a random normal, ties counting one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    ensure!(
        scores.len() == labels.len(),
        Dimension,
        "{} scores for {} labels",
        scores.len(),
        labels.len()
    );
    ensure!(
        scores.iter().all(|s| !s.is_nan()),
        Numeric,
        "scores contain NaN"
    );
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    ensure!(
        n_pos > 0 && n_neg > 0,
        InvalidArgument,
        "AUC needs both normal and anomalous samples"
    );
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j hold ranks i+1..=j
        let avg = (i + 1 + j) as f64 / 2.0;
        for &o in &order[i..j] {
            ranks[o] = avg;
        }
        i = j;
    }
    ranks
}

/// Largest sample for which the exact null distribution is used.
pub const WILCOXON_EXACT_MAX: usize = 20;

/// Smallest number of non-zero differences accepted.
pub const WILCOXON_MIN_PAIRS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// One-sided p-value for the alternative "a > b".
    pub p_value: f64,
    /// Sum of ranks of the positive differences.
    pub w_plus: f64,
    /// Pairs left after dropping zero differences.
    pub n: usize,
    pub zero_differences_dropped: usize,
    pub method: WilcoxonMethod,
}

/// One-sided Wilcoxon signed-rank test of `a > b`; returns the p-value.
pub fn wilcoxon_one_sided(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(wilcoxon_signed_rank(a, b)?.p_value)
}

/// Signed-rank test with zero differences dropped. Up to
/// [`WILCOXON_EXACT_MAX`] pairs the p-value is exact (ties included, via the
/// permutation distribution of the signs); above that a normal approximation
/// with tie-corrected variance is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    ensure!(a.len() == b.len(), Dimension, "paired samples differ in length: {} vs {}", a.len(), b.len());
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    ensure!(diffs.iter().all(|d| d.is_finite()), Numeric, "paired samples must be finite");
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let dropped = diffs.len() - nonzero.len();
    if nonzero.is_empty() {
        return Err(AresError::InvalidArgument("all paired differences are zero".into()));
    }
    let n = nonzero.len();
    ensure!(
        n >= WILCOXON_MIN_PAIRS,
        InvalidArgument,
        "need at least {WILCOXON_MIN_PAIRS} non-zero differences, got {n}"
    );
    let magnitudes: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&magnitudes);
    let w_plus: f64 = ranks.iter().zip(&nonzero).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();

    let (p_value, method) = if n <= WILCOXON_EXACT_MAX {
        // doubled average ranks are integers
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let observed = (2.0 * w_plus).round() as usize;
        (exact_upper_tail(&doubled, observed), WilcoxonMethod::Exact)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let tie_term: f64 = tie_sizes(&magnitudes).iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / 48.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term;
        ensure!(var > 0.0, Degenerate, "signed-rank variance vanished");
        let z = (w_plus - mean) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        (normal.sf(z).max(f64::MIN_POSITIVE), WilcoxonMethod::NormalApproximation)
    };
    Ok(WilcoxonResult {
        p_value: p_value.min(1.0),
        w_plus,
        n,
        zero_differences_dropped: dropped,
        method,
    })
}

/// `P(sum of a random subset of weights >= observed)` with each subset equally likely.
fn exact_upper_tail(weights: &[usize], observed: usize) -> f64 {
    let total: usize = weights.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &w in weights {
        for s in (0..=reach).rev() {
            if counts[s] != 0.0 {
                counts[s + w] += counts[s];
            }
        }
        reach += w;
    }
    let tail: f64 = counts[observed.min(total + 1)..].iter().sum();
    tail / 2f64.powi(weights.len() as i32)
}

fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > 1 {
            sizes.push(j - i);
        }
        i = j;
    }
    sizes
}

/// Mean and population standard deviation (divisor N).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    (crate::math::mean(values), crate::math::population_std(values))
}

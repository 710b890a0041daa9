use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::MetricsError;

/// Largest sample size (after dropping zero differences) tested exactly.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// `min(W+, W-)`.
    pub statistic: f64,
    pub p_value: f64,
    /// Number of non-zero differences.
    pub n: usize,
    pub exact: bool,
}

/// Ranks of `values` (1-based), ties receiving their average rank, doubled
/// so that every rank is an integer.
fn doubled_ranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0u64; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // average of ranks i+1 ..= j+1, doubled
        let doubled = (i + 1 + j + 1) as u64;
        for &k in &order[i..=j] {
            ranks[k] = doubled;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided paired Wilcoxon signed-rank test on `x - y`.
///
/// Zero differences are dropped and tied magnitudes get average ranks. Up to
/// [`EXACT_MAX_N`] differences the p-value is the exact permutation
/// probability `2 * min(P(W+ <= w), P(W+ >= w))`, capped at 1; beyond that a
/// tie-corrected normal approximation with continuity correction is used.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(MetricsError::DegenerateSample);
    }
    let n = diffs.len();
    let magnitudes: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = doubled_ranks(&magnitudes);
    let total: u64 = ranks.iter().sum();
    let w_plus: u64 = ranks.iter().zip(&diffs).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let statistic = w_plus.min(total - w_plus) as f64 / 2.0;

    if n <= EXACT_MAX_N {
        // counts[s]: sign assignments whose doubled positive-rank sum is s
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let w = w_plus as usize;
        let lower: u64 = counts[..=w].iter().sum();
        let upper: u64 = counts[w..].iter().sum();
        let p = 2.0 * lower.min(upper) as f64 / 2f64.powi(n as i32);
        return Ok(WilcoxonResult { statistic, p_value: p.min(1.0), n, exact: true });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    for group in sorted.chunk_by(|a, b| a == b) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let w = w_plus as f64 / 2.0;
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    let p = erfc(z / std::f64::consts::SQRT_2);
    Ok(WilcoxonResult { statistic, p_value: p.min(1.0), n, exact: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EffectSize {
    Negligible,
    Small,
    Medium,
    Large,
}

impl EffectSize {
    pub fn of(delta: f64) -> Self {
        let d = delta.abs();
        if d < 0.147 {
            EffectSize::Negligible
        } else if d < 0.33 {
            EffectSize::Small
        } else if d < 0.474 {
            EffectSize::Medium
        } else {
            EffectSize::Large
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EffectSize::Negligible => "negligible",
            EffectSize::Small => "small",
            EffectSize::Medium => "medium",
            EffectSize::Large => "large",
        }
    }
}

impl fmt::Display for EffectSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cliff's delta of `x` over `y` with its conventional label.
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<(f64, EffectSize), MetricsError> {
    if x.is_empty() || y.is_empty() {
        return Err(MetricsError::EmptySample);
    }
    let mut ys = y.to_vec();
    ys.sort_by(f64::total_cmp);
    let mut balance: i64 = 0;
    for &xi in x {
        let below = ys.partition_point(|v| *v < xi) as i64;
        let not_above = ys.partition_point(|v| *v <= xi) as i64;
        let above = ys.len() as i64 - not_above;
        balance += below - above;
    }
    let d = balance as f64 / (x.len() as f64 * y.len() as f64);
    Ok((d, EffectSize::of(d)))
}

/// Median of a non-empty sample; the mean of the two middle values for
/// even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { (v[mid - 1] + v[mid]) / 2.0 })
}

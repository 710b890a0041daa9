//! Accuracy (MAP, MRR), effort (top-k LOC) and paired statistics.

mod report;
mod stats;

pub use report::{compare_levels, render_comparison_markdown, write_summary_csv, LevelComparison, TechniqueComparison};
pub use stats::{cliffs_delta, median, wilcoxon_signed_rank, EffectSize, WilcoxonResult, EXACT_MAX_N};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{BugId, Granularity, OracleSet, RankedList};

/// LOC budgets reported by default.
pub const DEFAULT_K_VALUES: [usize; 4] = [100, 500, 1000, 5000];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("oracle of {0} is empty")]
    EmptyOracle(BugId),
    #[error("no LOC known for ranked module `{module}` of {bug}")]
    MissingLoc { bug: BugId, module: String },
    #[error("all paired differences are zero")]
    DegenerateSample,
    #[error("empty sample")]
    EmptySample,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("no bug results to summarize")]
    EmptyResults,
    #[error("summaries use different k values")]
    InconsistentKValues,
    #[error("report output: {0}")]
    Output(String),
}

fn check_oracle(oracle: &OracleSet) -> Result<(), MetricsError> {
    if oracle.modules.is_empty() {
        Err(MetricsError::EmptyOracle(oracle.bug.clone()))
    } else {
        Ok(())
    }
}

/// Average precision; oracle modules missing from the list contribute 0.
pub fn average_precision(ranked: &RankedList, oracle: &OracleSet) -> Result<f64, MetricsError> {
    check_oracle(oracle)?;
    let mut seen = 0usize;
    let mut sum = 0.0;
    for (i, id) in ranked.module_ids().enumerate() {
        if oracle.modules.contains(id) {
            seen += 1;
            sum += seen as f64 / (i + 1) as f64;
        }
    }
    Ok(sum / oracle.modules.len() as f64)
}

/// `1 / r` for the first relevant rank `r`, 0 when none is ranked.
pub fn reciprocal_rank(ranked: &RankedList, oracle: &OracleSet) -> Result<f64, MetricsError> {
    check_oracle(oracle)?;
    Ok(ranked
        .module_ids()
        .position(|id| oracle.modules.contains(id))
        .map_or(0.0, |i| 1.0 / (i + 1) as f64))
}

/// Everything needed to score one localized bug.
#[derive(Debug, Clone, PartialEq)]
pub struct BugResult {
    pub bug: BugId,
    pub ranked: RankedList,
    pub oracle: OracleSet,
    pub loc_by_module: BTreeMap<String, usize>,
}

impl BugResult {
    /// Whether a relevant module is reached within `k` cumulative lines,
    /// counting the relevant module's own lines.
    pub fn top_k_hit(&self, k: usize) -> Result<bool, MetricsError> {
        let mut cumulative = 0usize;
        for id in self.ranked.module_ids() {
            let loc = self.loc_by_module.get(id).ok_or_else(|| MetricsError::MissingLoc {
                bug: self.bug.clone(),
                module: id.to_string(),
            })?;
            cumulative += loc;
            if cumulative > k {
                return Ok(false);
            }
            if self.oracle.modules.contains(id) {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Fraction of bugs hit within a budget of `k` lines.
pub fn top_k_loc(results: &[BugResult], k: usize) -> Result<f64, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyResults);
    }
    let mut hits = 0usize;
    for r in results {
        if r.top_k_hit(k)? {
            hits += 1;
        }
    }
    Ok(hits as f64 / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectSummary {
    pub project: String,
    pub technique: String,
    pub granularity: Granularity,
    pub map_value: f64,
    pub mrr_value: f64,
    pub top_k_loc: BTreeMap<usize, f64>,
    pub bug_count: usize,
}

pub fn summarize_project(
    project: &str,
    results: &[BugResult],
    technique: &str,
    granularity: Granularity,
    k_values: &[usize],
) -> Result<ProjectSummary, MetricsError> {
    if results.is_empty() {
        return Err(MetricsError::EmptyResults);
    }
    let n = results.len() as f64;
    let mut ap_sum = 0.0;
    let mut rr_sum = 0.0;
    for r in results {
        ap_sum += average_precision(&r.ranked, &r.oracle)?;
        rr_sum += reciprocal_rank(&r.ranked, &r.oracle)?;
    }
    let top_k_loc = k_values
        .iter()
        .map(|&k| Ok((k, top_k_loc(results, k)?)))
        .collect::<Result<_, MetricsError>>()?;
    Ok(ProjectSummary {
        project: project.to_string(),
        technique: technique.to_string(),
        granularity,
        map_value: ap_sum / n,
        mrr_value: rr_sum / n,
        top_k_loc,
        bug_count: results.len(),
    })
}

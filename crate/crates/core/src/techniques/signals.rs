use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::ir::{tokenize, TokenStream};
use crate::model::{BugReport, OracleSet, Snapshot};

/// Commit timestamps per module id.
pub type ModuleHistory = BTreeMap<String, Vec<DateTime<Utc>>>;

/// Whether `past` was already resolved when `bug` was reported.
pub fn resolved_before(past: &BugReport, bug: &BugReport) -> bool {
    past.resolved_at.is_some_and(|r| r < bug.reported_at)
}

fn log_tf_vector(tokens: &TokenStream) -> BTreeMap<&str, f64> {
    let mut freq: BTreeMap<&str, u32> = BTreeMap::new();
    for t in tokens {
        *freq.entry(t.as_str()).or_insert(0) += 1;
    }
    freq.into_iter()
        .map(|(t, f)| (t, 1.0 + f64::from(f).ln()))
        .collect()
}

/// Cosine of two token streams over log-tf weights (no idf: the past
/// reports of one project are too few for stable document frequencies).
pub fn report_similarity(a: &TokenStream, b: &TokenStream) -> f64 {
    let (va, vb) = (log_tf_vector(a), log_tf_vector(b));
    // ordered maps keep every float sum reproducible
    let norm = |v: &BTreeMap<&str, f64>| v.values().map(|w| w * w).sum::<f64>().sqrt();
    let (na, nb) = (norm(&va), norm(&vb));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let dot: f64 = va.iter().filter_map(|(t, w)| Some(w * vb.get(t)?)).sum();
    (dot / (na * nb)).clamp(0.0, 1.0)
}

/// Similar-report score: each earlier bug spreads its textual similarity to
/// the query evenly over its oracle. Bugs not resolved before the query was
/// reported are skipped.
pub fn simi_score(
    bug: &BugReport,
    past_bugs: &[(BugReport, OracleSet)],
    snapshot: &Snapshot,
) -> BTreeMap<String, f64> {
    let query = tokenize(&bug.full_text());
    let mut scores: BTreeMap<String, f64> = BTreeMap::new();
    for (past, oracle) in past_bugs {
        if !resolved_before(past, bug) || oracle.modules.is_empty() {
            continue;
        }
        let s = report_similarity(&query, &tokenize(&past.full_text()));
        if s == 0.0 {
            continue;
        }
        let share = s / oracle.modules.len() as f64;
        for module in oracle.modules.iter().filter(|m| snapshot.contains(m)) {
            *scores.entry(module.clone()).or_insert(0.0) += share;
        }
    }
    scores
}

const DAY_MS: f64 = 86_400_000.0;

/// Recency of changes: `sum exp(-age / tau)` over commits at most `k_days`
/// old, scaled so the most recently active module of the snapshot gets 1.
pub fn history_score(
    snapshot: &Snapshot,
    history: &ModuleHistory,
    query_date: DateTime<Utc>,
    k_days: f64,
    tau: f64,
) -> BTreeMap<String, f64> {
    let raw: BTreeMap<String, f64> = snapshot
        .docs()
        .iter()
        .map(|doc| {
            let sum = history
                .get(&doc.id)
                .into_iter()
                .flatten()
                .map(|&at| (query_date - at).num_milliseconds() as f64 / DAY_MS)
                .filter(|&age| (0.0..=k_days).contains(&age))
                .map(|age| (-age / tau).exp())
                .sum::<f64>();
            (doc.id.clone(), sum)
        })
        .collect();
    let max = raw.values().copied().fold(0.0, f64::max);
    raw.into_iter()
        .map(|(id, r)| (id, if max > 0.0 { r / max } else { 0.0 }))
        .collect()
}

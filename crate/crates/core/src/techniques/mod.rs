//! The five bug-localization techniques as one scoring engine.
//!
//! A technique is a [`TechniqueConfig`]: which text similarity to use and how
//! much weight to give similar past reports, stack traces and change history.
//! [`preset`] returns the configurations that imitate BugLocator, BRTracer,
//! BLUiR, AmaLgam and BLIA.

mod signals;
mod stack;

pub use signals::{history_score, report_similarity, resolved_before, simi_score, ModuleHistory};
pub use stack::{parse_stack_traces, stack_trace_boost, StackFrame};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ir::{tokenize, Index, IrError, StructuredQuery};
use crate::model::{BugReport, OracleSet, RankedEntry, RankedList, Snapshot};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TechniqueError {
    #[error("unknown technique `{0}`")]
    UnknownTechnique(String),
    #[error("invalid technique configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot localize over an empty corpus")]
    EmptyCorpus,
    #[error("index does not cover snapshot {0}")]
    IndexMismatch(String),
    #[error(transparent)]
    Ir(#[from] IrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextMode {
    Rvsm,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TechniqueConfig {
    pub text_mode: TextMode,
    /// Weight of similar past reports, in `[0, 1]`.
    pub alpha: f64,
    /// Weight of the stack-trace boost, `>= 0`.
    pub beta: f64,
    /// Weight of change history, in `[0, 1]`.
    pub gamma: f64,
    pub history_window_days: f64,
    pub history_decay_days: f64,
    pub max_frames: usize,
    /// Minimum ranked-list length; `None` ranks the whole corpus.
    #[serde(default)]
    pub list_length: Option<usize>,
}

impl TechniqueConfig {
    pub fn validate(&self) -> Result<(), TechniqueError> {
        let bad = |msg: &str| Err(TechniqueError::InvalidConfig(msg.to_string()));
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return bad("beta must be finite and non-negative");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.history_window_days > 0.0 && self.history_window_days.is_finite()) {
            return bad("history_window_days must be positive");
        }
        if !(self.history_decay_days > 0.0 && self.history_decay_days.is_finite()) {
            return bad("history_decay_days must be positive");
        }
        if self.max_frames == 0 {
            return bad("max_frames must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Technique {
    BugLocator,
    BRTracer,
    BLUiR,
    AmaLgam,
    BLIA,
}

impl Technique {
    pub const ALL: [Technique; 5] = [
        Technique::BugLocator,
        Technique::BLUiR,
        Technique::BRTracer,
        Technique::AmaLgam,
        Technique::BLIA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Technique::BugLocator => "BugLocator",
            Technique::BRTracer => "BRTracer",
            Technique::BLUiR => "BLUiR",
            Technique::AmaLgam => "AmaLgam",
            Technique::BLIA => "BLIA",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Technique {
    type Err = TechniqueError;

    /// Case-insensitive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Technique::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| TechniqueError::UnknownTechnique(s.to_string()))
    }
}

pub fn preset(technique: Technique) -> TechniqueConfig {
    let (text_mode, beta, gamma) = match technique {
        Technique::BugLocator => (TextMode::Rvsm, 0.0, 0.0),
        Technique::BRTracer => (TextMode::Rvsm, 0.2, 0.0),
        Technique::BLUiR => (TextMode::Structured, 0.0, 0.0),
        Technique::AmaLgam => (TextMode::Structured, 0.0, 0.3),
        Technique::BLIA => (TextMode::Structured, 0.2, 0.3),
    };
    TechniqueConfig {
        text_mode,
        alpha: 0.3,
        beta,
        gamma,
        history_window_days: 15.0,
        history_decay_days: 7.0,
        max_frames: 10,
        list_length: None,
    }
}

/// Preset by technique name.
pub fn preset_named(name: &str) -> Result<TechniqueConfig, TechniqueError> {
    Ok(preset(name.parse()?))
}

/// Min-max normalization over `candidates`; absent modules count as 0 and a
/// constant map normalizes to all zeros.
pub fn min_max<'a>(
    scores: &BTreeMap<String, f64>,
    candidates: impl Iterator<Item = &'a String> + Clone,
) -> BTreeMap<String, f64> {
    let value = |id: &String| scores.get(id).copied().unwrap_or(0.0);
    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for id in candidates.clone() {
        min = min.min(value(id));
        max = max.max(value(id));
    }
    candidates
        .map(|id| {
            let n = if max > min { (value(id) - min) / (max - min) } else { 0.0 };
            (id.clone(), n)
        })
        .collect()
}

/// `final = (1-γ)((1-α)·mm(text) + α·mm(simi) + β·stack) + γ·history`,
/// over the modules of `text`.
pub fn combine(
    text: &BTreeMap<String, f64>,
    simi: &BTreeMap<String, f64>,
    stack: &BTreeMap<String, f64>,
    history: &BTreeMap<String, f64>,
    config: &TechniqueConfig,
) -> BTreeMap<String, f64> {
    let text_n = min_max(text, text.keys());
    let simi_n = min_max(simi, text.keys());
    let get = |m: &BTreeMap<String, f64>, id: &String| m.get(id).copied().unwrap_or(0.0);
    text.keys()
        .map(|id| {
            let s1 = (1.0 - config.alpha) * text_n[id] + config.alpha * simi_n[id];
            let s2 = s1 + config.beta * get(stack, id);
            let score = (1.0 - config.gamma) * s2 + config.gamma * get(history, id);
            (id.clone(), score)
        })
        .collect()
}

/// Everything one localization run reads.
#[derive(Debug, Clone, Copy)]
pub struct LocalizeInput<'a> {
    pub bug: &'a BugReport,
    pub snapshot: &'a Snapshot,
    /// Must be built over `snapshot` with the fields the text mode needs.
    pub index: &'a Index,
    pub past_bugs: &'a [(BugReport, OracleSet)],
    pub history: &'a ModuleHistory,
}

/// Base text similarity of every snapshot module.
pub fn text_scores(input: &LocalizeInput<'_>, mode: TextMode) -> Result<BTreeMap<String, f64>, TechniqueError> {
    let bug = input.bug;
    let scores = match mode {
        TextMode::Rvsm => input.index.rvsm_all(&tokenize(&bug.full_text()))?,
        TextMode::Structured => input.index.structured_all(&StructuredQuery {
            summary: tokenize(&bug.summary),
            description: tokenize(&bug.description),
        })?,
    };
    Ok(input.index.doc_ids().iter().cloned().zip(scores).collect())
}

/// Ranks the snapshot's modules for one bug report.
pub fn localize(input: &LocalizeInput<'_>, config: &TechniqueConfig) -> Result<RankedList, TechniqueError> {
    config.validate()?;
    let snapshot = input.snapshot;
    if snapshot.is_empty() {
        return Err(TechniqueError::EmptyCorpus);
    }
    let covers = input.index.len() == snapshot.len()
        && snapshot.docs().iter().zip(input.index.doc_ids()).all(|(d, id)| &d.id == id);
    if !covers {
        return Err(TechniqueError::IndexMismatch(crate::ir::snapshot_id(snapshot)));
    }

    let text = text_scores(input, config.text_mode)?;
    let simi = if config.alpha > 0.0 {
        simi_score(input.bug, input.past_bugs, snapshot)
    } else {
        BTreeMap::new()
    };
    let stack = if config.beta > 0.0 {
        let frames = parse_stack_traces(&input.bug.description);
        stack_trace_boost(&frames, snapshot, snapshot.granularity, config.max_frames)
    } else {
        BTreeMap::new()
    };
    let history = if config.gamma > 0.0 {
        history_score(
            snapshot,
            input.history,
            input.bug.reported_at,
            config.history_window_days,
            config.history_decay_days,
        )
    } else {
        BTreeMap::new()
    };
    let combined = combine(&text, &simi, &stack, &history, config);

    let ranked = RankedList::from_scores(input.bug.id.clone(), combined);
    let positives = ranked.entries().iter().take_while(|e| e.score > 0.0).count();
    let keep = match config.list_length {
        None => ranked.len(),
        Some(n) => positives.max(n).min(ranked.len()),
    };
    let entries: Vec<RankedEntry> = ranked.entries()[..keep].to_vec();
    Ok(RankedList::from_sorted(input.bug.id.clone(), entries).expect("prefix of a ranked list is ranked"))
}

//! Domain types shared by every stage of the pipeline: bug identifiers and
//! reports, module documents, snapshots, oracles and ranked lists.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed bug id `{0}` (expected KEY-N, e.g. CODEC-199)")]
    MalformedBugId(String),
    #[error("bug {0}: summary is empty")]
    EmptySummary(BugId),
    #[error("bug {0}: resolved_at precedes reported_at")]
    ResolvedBeforeReported(BugId),
    #[error("duplicate module id `{0}` in snapshot")]
    DuplicateModule(String),
    #[error("snapshot mixes granularities: `{0}` is {1}, expected {2}")]
    MixedGranularity(String, Granularity, Granularity),
    #[error("ranked list for {bug} violates ordering at position {position}")]
    UnsortedRanking { bug: BugId, position: usize },
    #[error("ranked list for {bug} repeats module `{module}`")]
    DuplicateRankedModule { bug: BugId, module: String },
}

/// Issue-tracker key such as `CODEC-199`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BugId {
    pub project_key: String,
    pub number: u64,
}

impl BugId {
    pub fn new(project_key: impl Into<String>, number: u64) -> Result<Self, ModelError> {
        let id = BugId {
            project_key: project_key.into(),
            number,
        };
        // re-validate through the textual form so both constructors agree
        parse_bug_id(&id.to_string())
    }
}

impl fmt::Display for BugId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.project_key, self.number)
    }
}

impl FromStr for BugId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bug_id(s)
    }
}

impl Serialize for BugId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BugId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_bug_id(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses the canonical `[A-Z][A-Z0-9]*-[1-9][0-9]*` form, nothing else.
pub fn parse_bug_id(text: &str) -> Result<BugId, ModelError> {
    let malformed = || ModelError::MalformedBugId(text.to_string());
    let (key, number) = text.split_once('-').ok_or_else(malformed)?;

    let mut key_chars = key.chars();
    match key_chars.next() {
        Some(c) if c.is_ascii_uppercase() => {}
        _ => return Err(malformed()),
    }
    if !key_chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit()) {
        return Err(malformed());
    }

    let bytes = number.as_bytes();
    if bytes.is_empty() || bytes[0] == b'0' || !bytes.iter().all(u8::is_ascii_digit) {
        return Err(malformed());
    }
    let number = number.parse::<u64>().map_err(|_| malformed())?;

    Ok(BugId {
        project_key: key.to_string(),
        number,
    })
}

/// A resolved (or open) issue-tracker record used as the localization query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub id: BugId,
    pub summary: String,
    #[serde(default)]
    pub description: String,
    pub reported_at: DateTime<Utc>,
    #[serde(default)]
    pub resolved_at: Option<DateTime<Utc>>,
    #[serde(default)]
    pub affected_versions: Vec<String>,
    #[serde(default)]
    pub fixed_versions: Vec<String>,
}

impl BugReport {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.summary.trim().is_empty() {
            return Err(ModelError::EmptySummary(self.id.clone()));
        }
        if let Some(resolved) = self.resolved_at {
            if resolved < self.reported_at {
                return Err(ModelError::ResolvedBeforeReported(self.id.clone()));
            }
        }
        Ok(())
    }

    /// Summary and description joined, the usual free-text query.
    pub fn full_text(&self) -> String {
        format!("{}\n{}", self.summary, self.description)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    File,
    Method,
}

impl Granularity {
    pub fn as_str(self) -> &'static str {
        match self {
            Granularity::File => "file",
            Granularity::Method => "method",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Granularity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "file" => Ok(Granularity::File),
            "method" => Ok(Granularity::Method),
            other => Err(format!("unknown granularity `{other}` (expected file or method)")),
        }
    }
}

/// Structural fields extracted from Java source, used by structured retrieval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocField {
    /// The whole module text.
    Content,
    ClassNames,
    MethodNames,
    Identifiers,
    Comments,
}

impl DocField {
    pub const STRUCTURAL: [DocField; 4] = [
        DocField::ClassNames,
        DocField::MethodNames,
        DocField::Identifiers,
        DocField::Comments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DocField::Content => "content",
            DocField::ClassNames => "class_names",
            DocField::MethodNames => "method_names",
            DocField::Identifiers => "identifiers",
            DocField::Comments => "comments",
        }
    }
}

/// Counts physical lines; a trailing line without `\n` still counts.
pub fn count_loc(content: &str) -> usize {
    let newlines = content.bytes().filter(|&b| b == b'\n').count();
    if content.is_empty() || content.ends_with('\n') {
        newlines
    } else {
        newlines + 1
    }
}

/// One searchable module: a source file or a method file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleDoc {
    pub id: String,
    pub granularity: Granularity,
    pub content: String,
    pub loc: usize,
    pub fields: BTreeMap<DocField, String>,
}

impl ModuleDoc {
    pub fn new(
        id: impl Into<String>,
        granularity: Granularity,
        content: impl Into<String>,
        fields: BTreeMap<DocField, String>,
    ) -> Self {
        let content = content.into();
        ModuleDoc {
            id: id.into(),
            granularity,
            loc: count_loc(&content),
            content,
            fields,
        }
    }

    /// Text of a field; `Content` maps to the module text itself.
    pub fn field_text(&self, field: DocField) -> &str {
        match field {
            DocField::Content => &self.content,
            other => self.fields.get(&other).map(String::as_str).unwrap_or(""),
        }
    }
}

/// The module corpus of one released version. Docs are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub project: String,
    pub version_label: String,
    pub release_date: DateTime<Utc>,
    pub granularity: Granularity,
    docs: Vec<ModuleDoc>,
}

impl Snapshot {
    pub fn new(
        project: impl Into<String>,
        version_label: impl Into<String>,
        release_date: DateTime<Utc>,
        granularity: Granularity,
        mut docs: Vec<ModuleDoc>,
    ) -> Result<Self, ModelError> {
        docs.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in docs.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(ModelError::DuplicateModule(pair[0].id.clone()));
            }
        }
        if let Some(doc) = docs.iter().find(|d| d.granularity != granularity) {
            return Err(ModelError::MixedGranularity(
                doc.id.clone(),
                doc.granularity,
                granularity,
            ));
        }
        Ok(Snapshot {
            project: project.into(),
            version_label: version_label.into(),
            release_date,
            granularity,
            docs,
        })
    }

    pub fn docs(&self) -> &[ModuleDoc] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn doc(&self, id: &str) -> Option<&ModuleDoc> {
        self.docs
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.docs[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.doc(id).is_some()
    }

    pub fn loc_by_module(&self) -> BTreeMap<String, usize> {
        self.docs.iter().map(|d| (d.id.clone(), d.loc)).collect()
    }
}

/// Modules changed by the fixing commits of one bug.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSet {
    pub bug: BugId,
    pub granularity: Granularity,
    pub modules: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub module_id: String,
    pub score: f64,
}

/// Modules ordered by descending score; ties broken by ascending module id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedList {
    pub bug: BugId,
    entries: Vec<RankedEntry>,
}

/// Total order used for every ranking: score descending, then id ascending.
pub fn ranking_order(a: &RankedEntry, b: &RankedEntry) -> std::cmp::Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| a.module_id.cmp(&b.module_id))
}

impl RankedList {
    /// Sorts arbitrary scores into a ranked list.
    pub fn from_scores<I, S>(bug: BugId, scores: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        // a module reported twice keeps its best score
        let mut best: BTreeMap<String, f64> = BTreeMap::new();
        for (id, score) in scores {
            let slot = best.entry(id.into()).or_insert(score);
            if score > *slot {
                *slot = score;
            }
        }
        let mut entries: Vec<RankedEntry> = best
            .into_iter()
            .map(|(module_id, score)| RankedEntry { module_id, score })
            .collect();
        entries.sort_by(ranking_order);
        RankedList { bug, entries }
    }

    /// Accepts entries that are already in ranking order, rejecting anything else.
    pub fn from_sorted(bug: BugId, entries: Vec<RankedEntry>) -> Result<Self, ModelError> {
        let mut seen = HashSet::new();
        for (i, entry) in entries.iter().enumerate() {
            if !seen.insert(entry.module_id.as_str()) {
                return Err(ModelError::DuplicateRankedModule {
                    bug,
                    module: entry.module_id.clone(),
                });
            }
            if i > 0 && ranking_order(&entries[i - 1], entry) != std::cmp::Ordering::Less {
                return Err(ModelError::UnsortedRanking { bug, position: i });
            }
        }
        Ok(RankedList { bug, entries })
    }

    pub fn entries(&self) -> &[RankedEntry] {
        &self.entries
    }

    pub fn module_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.module_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// 1-based rank of a module, if present.
    pub fn rank_of(&self, module_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.module_id == module_id)
            .map(|i| i + 1)
    }
}

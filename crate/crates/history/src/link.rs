use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, Utc};
use git2::{Delta, Oid, Repository};
use irbl_core::techniques::ModuleHistory;
use irbl_core::{parse_bug_id, BugId, BugReport, Granularity, OracleSet};
use serde::{Deserialize, Serialize};

use crate::snapshot::{all_commits, commit_time, is_module_path};
use crate::HistoryError;

/// A released version: label, release date and the git ref that names it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionEntry {
    pub label: String,
    pub release_date: DateTime<Utc>,
    #[serde(rename = "ref")]
    pub git_ref: String,
}

/// Versions in release order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VersionCatalog {
    entries: Vec<VersionEntry>,
}

impl VersionCatalog {
    pub fn new(entries: Vec<VersionEntry>) -> Result<Self, HistoryError> {
        if entries.is_empty() {
            return Err(HistoryError::InvalidCatalog("no versions".into()));
        }
        let mut labels = HashSet::new();
        for (i, e) in entries.iter().enumerate() {
            if !labels.insert(e.label.as_str()) {
                return Err(HistoryError::InvalidCatalog(format!("duplicate label `{}`", e.label)));
            }
            if i > 0 && entries[i - 1].release_date > e.release_date {
                return Err(HistoryError::InvalidCatalog(format!(
                    "`{}` is released before `{}`",
                    e.label,
                    entries[i - 1].label
                )));
            }
        }
        Ok(VersionCatalog { entries })
    }

    pub fn entries(&self) -> &[VersionEntry] {
        &self.entries
    }

    pub fn get(&self, label: &str) -> Option<&VersionEntry> {
        self.entries.iter().find(|e| e.label == label)
    }
}

/// Linked commit ids per bug, oldest commit first.
pub type BugCommitLinks = BTreeMap<BugId, Vec<String>>;

/// Bug ids written as whole tokens in a commit message. A token is a maximal
/// run of alphanumerics and `-`, so `CODEC-1990` or `X-CODEC-199` never yield
/// `CODEC-199`.
fn mentioned_ids(message: &str) -> impl Iterator<Item = BugId> + '_ {
    message
        .split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .filter_map(|token| parse_bug_id(token).ok())
}

/// Links every bug to the commits whose message names it.
pub fn link_bugs(repo: &Repository, bugs: &[BugReport]) -> Result<BugCommitLinks, HistoryError> {
    let wanted: HashSet<&BugId> = bugs.iter().map(|b| &b.id).collect();
    let mut found: BTreeMap<BugId, BTreeSet<(i64, String)>> = BTreeMap::new();
    for oid in all_commits(repo)? {
        let commit = repo.find_commit(oid)?;
        let message = String::from_utf8_lossy(commit.message_bytes());
        for id in mentioned_ids(&message) {
            if wanted.contains(&id) {
                found.entry(id).or_default().insert((commit.time().seconds(), oid.to_string()));
            }
        }
    }
    Ok(bugs
        .iter()
        .map(|b| {
            let commits = found.get(&b.id).map(|s| s.iter().map(|(_, c)| c.clone()).collect()).unwrap_or_default();
            (b.id.clone(), commits)
        })
        .collect())
}

/// Module paths a commit adds or modifies relative to its first parent.
fn changed_modules(repo: &Repository, oid: Oid, granularity: Granularity) -> Result<Vec<String>, HistoryError> {
    let commit = repo.find_commit(oid)?;
    let new_tree = commit.tree()?;
    let old_tree = match commit.parents().next() {
        Some(p) => Some(p.tree()?),
        None => None,
    };
    let diff = repo.diff_tree_to_tree(old_tree.as_ref(), Some(&new_tree), None)?;
    let mut out = Vec::new();
    for delta in diff.deltas() {
        if !matches!(delta.status(), Delta::Added | Delta::Modified | Delta::Typechange) {
            continue;
        }
        if let Some(path) = delta.new_file().path().and_then(|p| p.to_str()) {
            if is_module_path(path, granularity) {
                out.push(path.to_string());
            }
        }
    }
    Ok(out)
}

/// Modules added or modified by the bug's linked commits.
pub fn derive_oracle(
    bug: &BugId,
    links: &BugCommitLinks,
    repo: &Repository,
    granularity: Granularity,
) -> Result<OracleSet, HistoryError> {
    let commits = links.get(bug).filter(|c| !c.is_empty()).ok_or_else(|| HistoryError::NoLinks(bug.clone()))?;
    let mut modules = BTreeSet::new();
    for id in commits {
        let oid = Oid::from_str(id)?;
        modules.extend(changed_modules(repo, oid, granularity)?);
    }
    if modules.is_empty() {
        return Err(HistoryError::BugExcluded(bug.clone()));
    }
    Ok(OracleSet { bug: bug.clone(), granularity, modules })
}

/// The version to search for a bug: its earliest affected version known to
/// the catalog, else the last release on or before the report date, else the
/// first release.
pub fn select_snapshot<'c>(bug: &BugReport, catalog: &'c VersionCatalog) -> &'c VersionEntry {
    let entries = catalog.entries();
    if let Some(hit) = entries.iter().find(|e| bug.affected_versions.contains(&e.label)) {
        return hit;
    }
    entries
        .iter()
        .rev()
        .find(|e| e.release_date <= bug.reported_at)
        .unwrap_or(&entries[0])
}

/// Commit times of every module change, for the history signal. Merge
/// commits are skipped: their first-parent diff repeats changes already
/// counted on the merged branch.
pub fn module_commit_times(repo: &Repository, granularity: Granularity) -> Result<ModuleHistory, HistoryError> {
    let mut history = ModuleHistory::new();
    for oid in all_commits(repo)? {
        let commit = repo.find_commit(oid)?;
        if commit.parent_count() > 1 {
            continue;
        }
        let at = commit_time(&commit);
        for path in changed_modules(repo, oid, granularity)? {
            history.entry(path).or_default().push(at);
        }
    }
    for times in history.values_mut() {
        times.sort();
    }
    Ok(history)
}

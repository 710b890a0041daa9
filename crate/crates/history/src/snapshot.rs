use chrono::{DateTime, Utc};
use git2::{Commit, ObjectType, Oid, Repository, TreeWalkMode, TreeWalkResult};
use irbl_core::java::{extract_fields, parse_method_file_name};
use irbl_core::{Granularity, ModuleDoc, Snapshot};
use rayon::prelude::*;

use crate::HistoryError;

/// Commits that refs (and a detached HEAD) point at, deduplicated.
pub(crate) fn tip_commits(repo: &Repository) -> Result<Vec<Oid>, HistoryError> {
    let mut tips = Vec::new();
    for reference in repo.references()? {
        let reference = reference?;
        if reference.kind() == Some(git2::ReferenceType::Symbolic) {
            continue;
        }
        if let Ok(commit) = reference.peel_to_commit() {
            tips.push(commit.id());
        }
    }
    if let Ok(head) = repo.head() {
        if let Ok(commit) = head.peel_to_commit() {
            tips.push(commit.id());
        }
    }
    tips.sort();
    tips.dedup();
    Ok(tips)
}

/// Every commit reachable from any ref, oldest first.
pub(crate) fn all_commits(repo: &Repository) -> Result<Vec<Oid>, HistoryError> {
    let mut walk = repo.revwalk()?;
    walk.set_sorting(git2::Sort::TOPOLOGICAL | git2::Sort::REVERSE)?;
    for tip in tip_commits(repo)? {
        walk.push(tip)?;
    }
    Ok(walk.collect::<Result<_, _>>()?)
}

pub(crate) fn commit_time(commit: &Commit<'_>) -> DateTime<Utc> {
    DateTime::from_timestamp(commit.time().seconds(), 0).unwrap_or_default()
}

/// Whether `path` is a searchable module at `granularity`: a plain `.java`
/// file at file level, a method file inside a `<File>.java/` directory at
/// method level.
pub fn is_module_path(path: &str, granularity: Granularity) -> bool {
    if !path.ends_with(".java") {
        return false;
    }
    let parent_is_java = path
        .rsplit_once('/')
        .is_some_and(|(dir, _)| dir.ends_with(".java"));
    match granularity {
        Granularity::File => !parent_is_java,
        Granularity::Method => parent_is_java && parse_method_file_name(path).is_some(),
    }
}

pub fn resolve_commit<'r>(repo: &'r Repository, version_ref: &str) -> Result<Commit<'r>, HistoryError> {
    repo.revparse_single(version_ref)
        .and_then(|o| o.peel_to_commit())
        .map_err(|_| HistoryError::UnknownVersion(version_ref.to_string()))
}

/// All modules of `granularity` in the tree of `version_ref`.
pub fn checkout_snapshot(
    repo: &Repository,
    version_ref: &str,
    project: &str,
    version_label: &str,
    granularity: Granularity,
) -> Result<Snapshot, HistoryError> {
    let commit = resolve_commit(repo, version_ref)?;
    let tree = commit.tree()?;
    let mut blobs = Vec::new();
    tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() == Some(ObjectType::Blob) {
            let path = format!("{dir}{}", String::from_utf8_lossy(entry.name_bytes()));
            if is_module_path(&path, granularity) {
                blobs.push((path, entry.id()));
            }
        }
        TreeWalkResult::Ok
    })?;
    let mut sources = Vec::with_capacity(blobs.len());
    for (path, oid) in blobs {
        let blob = repo.find_blob(oid)?;
        sources.push((path, String::from_utf8_lossy(blob.content()).into_owned()));
    }
    let docs: Vec<ModuleDoc> = sources
        .into_par_iter()
        .map(|(path, content)| {
            let fields = extract_fields(&content);
            ModuleDoc::new(path, granularity, content, fields)
        })
        .collect();
    Ok(Snapshot::new(project, version_label, commit_time(&commit), granularity, docs)?)
}

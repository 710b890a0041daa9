use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};

use git2::{ObjectType, Oid, Repository, Sort};
use irbl_core::java::{method_file_names, render_method_file, split_compilation_unit};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::snapshot::tip_commits;
use crate::HistoryError;

/// Path to file contents; directories are implied by `/` in paths.
pub type FileTree = BTreeMap<String, Vec<u8>>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailurePolicy {
    /// Keep the unsplittable file verbatim at its original path.
    #[default]
    CopyOriginal,
    SkipFile,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformOptions {
    #[serde(default)]
    pub keep_non_java: bool,
    #[serde(default)]
    pub parse_failure_policy: ParseFailurePolicy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub commit: String,
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformReport {
    pub commits_processed: usize,
    /// Distinct Java blobs that were split.
    pub files_split: usize,
    /// Method files produced from those blobs.
    pub method_files_emitted: usize,
    /// Each failing blob is reported once, at the first commit it appears in.
    pub parse_failures: Vec<ParseFailure>,
    /// Original commit id to transformed commit id.
    pub commit_map: BTreeMap<String, String>,
}

fn is_java(name: &[u8]) -> bool {
    name.ends_with(b".java")
}

/// Rendered method files of one Java source, or why it could not be split.
type SplitResult = Result<Vec<(String, Vec<u8>)>, String>;

fn split_java(source: &[u8], path: &str) -> SplitResult {
    let text = std::str::from_utf8(source).map_err(|e| format!("not UTF-8: {e}"))?;
    let units = split_compilation_unit(text, path).map_err(|e| e.to_string())?;
    let names = method_file_names(&units).map_err(|e| e.to_string())?;
    Ok(names
        .into_iter()
        .zip(&units)
        .map(|(name, unit)| (name, render_method_file(unit).into_bytes()))
        .collect())
}

/// Result of [`transform_tree`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeTransform {
    pub tree: FileTree,
    /// `(path, message)` of every Java file that failed to split.
    pub failures: Vec<(String, String)>,
}

/// Replaces every Java file `p` by the directory `p/` of its method files.
pub fn transform_tree(original: &FileTree, options: &TransformOptions) -> TreeTransform {
    let split: Vec<(&String, SplitResult)> = original
        .par_iter()
        .filter(|(path, _)| is_java(path.as_bytes()))
        .map(|(path, data)| (path, split_java(data, path)))
        .collect();

    let mut out = TreeTransform::default();
    for (path, data) in original {
        if !is_java(path.as_bytes()) && options.keep_non_java {
            out.tree.insert(path.clone(), data.clone());
        }
    }
    for (path, result) in split {
        match result {
            Ok(files) => {
                for (name, bytes) in files {
                    out.tree.insert(format!("{path}/{name}"), bytes);
                }
            }
            Err(message) => {
                if options.parse_failure_policy == ParseFailurePolicy::CopyOriginal {
                    out.tree.insert(path.clone(), original[path].clone());
                }
                out.failures.push((path.clone(), message));
            }
        }
    }
    out
}

const MODE_TREE: i32 = 0o040000;
const MODE_BLOB: i32 = 0o100644;
const MODE_LINK: i32 = 0o160000;

/// What a Java blob turned into in the destination.
#[derive(Clone, Copy)]
enum JavaEntry {
    /// Directory of method files; `None` when the file has no concrete methods.
    Split(Option<Oid>),
    Failed,
}

struct Rewriter<'a> {
    src: &'a Repository,
    dst: &'a Repository,
    options: &'a TransformOptions,
    java: HashMap<Oid, JavaEntry>,
    trees: HashMap<Oid, Option<Oid>>,
    copied: HashSet<Oid>,
    commits: HashMap<Oid, Oid>,
    report: TransformReport,
}

#[cfg(unix)]
fn entry_path(name: &[u8]) -> PathBuf {
    use std::os::unix::ffi::OsStrExt;
    PathBuf::from(std::ffi::OsStr::from_bytes(name))
}

#[cfg(not(unix))]
fn entry_path(name: &[u8]) -> PathBuf {
    PathBuf::from(String::from_utf8_lossy(name).into_owned())
}

impl Rewriter<'_> {
    /// Java blobs reachable from `tree` that have not been split yet, with
    /// the first path each was seen at.
    fn pending_java(&self, tree: Oid, prefix: &str, seen: &mut HashSet<Oid>, out: &mut Vec<(Oid, String)>) -> Result<(), HistoryError> {
        if self.trees.contains_key(&tree) || !seen.insert(tree) {
            return Ok(());
        }
        let tree = self.src.find_tree(tree)?;
        for entry in tree.iter() {
            let name = String::from_utf8_lossy(entry.name_bytes());
            let path = format!("{prefix}{name}");
            match entry.kind() {
                Some(ObjectType::Tree) => self.pending_java(entry.id(), &format!("{path}/"), seen, out)?,
                Some(ObjectType::Blob)
                    if is_java(entry.name_bytes())
                        && !self.java.contains_key(&entry.id())
                        && seen.insert(entry.id()) =>
                {
                    out.push((entry.id(), path));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Splits all new Java blobs of a commit: reads and writes happen in a
    /// fixed order, only the parsing runs in parallel.
    fn split_new_java(&mut self, commit: Oid, tree: Oid) -> Result<(), HistoryError> {
        let mut pending = Vec::new();
        self.pending_java(tree, "", &mut HashSet::new(), &mut pending)?;
        let mut sources = Vec::with_capacity(pending.len());
        for (oid, path) in pending {
            let blob = self.src.find_blob(oid)?;
            sources.push((oid, path, blob.content().to_vec()));
        }
        let results: Vec<SplitResult> =
            sources.par_iter().map(|(_, path, data)| split_java(data, path)).collect();

        for ((oid, path, _), result) in sources.into_iter().zip(results) {
            let entry = match result {
                Ok(files) => {
                    self.report.files_split += 1;
                    self.report.method_files_emitted += files.len();
                    let mut builder = self.dst.treebuilder(None)?;
                    for (name, bytes) in &files {
                        let blob = self.dst.blob(bytes)?;
                        builder.insert(name, blob, MODE_BLOB)?;
                    }
                    JavaEntry::Split(if files.is_empty() { None } else { Some(builder.write()?) })
                }
                Err(message) => {
                    log::warn!("{commit}: cannot split {path}: {message}");
                    self.report.parse_failures.push(ParseFailure {
                        commit: commit.to_string(),
                        path,
                        message,
                    });
                    JavaEntry::Failed
                }
            };
            self.java.insert(oid, entry);
        }
        Ok(())
    }

    fn copy_blob(&mut self, oid: Oid) -> Result<(), HistoryError> {
        if self.copied.insert(oid) {
            let blob = self.src.find_blob(oid)?;
            self.dst.blob(blob.content())?;
        }
        Ok(())
    }

    /// Transformed image of a source tree; `None` when it would be empty.
    fn build_tree(&mut self, tree: Oid) -> Result<Option<Oid>, HistoryError> {
        if let Some(done) = self.trees.get(&tree) {
            return Ok(*done);
        }
        let source = self.src.find_tree(tree)?;
        let mut builder = self.dst.treebuilder(None)?;
        for entry in source.iter() {
            let name = entry_path(entry.name_bytes());
            let mode = entry.filemode();
            match entry.kind() {
                Some(ObjectType::Tree) => {
                    if let Some(sub) = self.build_tree(entry.id())? {
                        builder.insert(&name, sub, MODE_TREE)?;
                    }
                }
                Some(ObjectType::Blob) if is_java(entry.name_bytes()) => match self.java[&entry.id()] {
                    JavaEntry::Split(Some(dir)) => {
                        builder.insert(&name, dir, MODE_TREE)?;
                    }
                    JavaEntry::Split(None) => {}
                    JavaEntry::Failed => {
                        if self.options.parse_failure_policy == ParseFailurePolicy::CopyOriginal {
                            self.copy_blob(entry.id())?;
                            builder.insert(&name, entry.id(), mode)?;
                        }
                    }
                },
                Some(ObjectType::Blob) if self.options.keep_non_java => {
                    self.copy_blob(entry.id())?;
                    builder.insert(&name, entry.id(), mode)?;
                }
                Some(ObjectType::Commit) if self.options.keep_non_java => {
                    builder.insert(&name, entry.id(), MODE_LINK)?;
                }
                _ => {}
            }
        }
        let result = if builder.is_empty() { None } else { Some(builder.write()?) };
        self.trees.insert(tree, result);
        Ok(result)
    }

    fn empty_tree(&self) -> Result<Oid, HistoryError> {
        Ok(self.dst.treebuilder(None)?.write()?)
    }

    fn rewrite_commit(&mut self, oid: Oid) -> Result<Oid, HistoryError> {
        let commit = self.src.find_commit(oid)?;
        self.split_new_java(oid, commit.tree_id())?;
        let tree = match self.build_tree(commit.tree_id())? {
            Some(t) => t,
            None => self.empty_tree()?,
        };
        let mut parents = Vec::with_capacity(commit.parent_count());
        for parent in commit.parent_ids() {
            let mapped = self
                .commits
                .get(&parent)
                .ok_or_else(|| HistoryError::Cycle(oid.to_string(), parent.to_string()))?;
            parents.push(*mapped);
        }
        let odb = self.src.odb()?;
        let raw = odb.read(oid)?;
        let bytes = rewrite_commit_object(raw.data(), tree, &parents)
            .ok_or_else(|| HistoryError::MalformedObject(oid.to_string(), "commit header".into()))?;
        let new = self.dst.odb()?.write(ObjectType::Commit, &bytes)?;
        self.commits.insert(oid, new);
        Ok(new)
    }

    /// Annotated tags are rewritten to point at the transformed target.
    fn rewrite_tag(&mut self, oid: Oid) -> Result<Option<Oid>, HistoryError> {
        let tag = self.src.find_tag(oid)?;
        let target = match tag.target_type() {
            Some(ObjectType::Commit) => self.commits.get(&tag.target_id()).copied(),
            Some(ObjectType::Tag) => self.rewrite_tag(tag.target_id())?,
            _ => None,
        };
        let Some(target) = target else {
            return Ok(None);
        };
        let odb = self.src.odb()?;
        let raw = odb.read(oid)?;
        let bytes = rewrite_tag_object(raw.data(), target)
            .ok_or_else(|| HistoryError::MalformedObject(oid.to_string(), "tag header".into()))?;
        Ok(Some(self.dst.odb()?.write(ObjectType::Tag, &bytes)?))
    }

    fn recreate_refs(&mut self) -> Result<(), HistoryError> {
        let mut symbolic = Vec::new();
        for reference in self.src.references()? {
            let reference = reference?;
            let Ok(name) = reference.name().map(str::to_string) else {
                continue;
            };
            if let Ok(Some(target)) = reference.symbolic_target() {
                symbolic.push((name, target.to_string()));
                continue;
            }
            if !(name.starts_with("refs/heads/") || name.starts_with("refs/tags/") || name.starts_with("refs/remotes/")) {
                log::info!("not copying {name}");
                continue;
            }
            let Some(target) = reference.target() else { continue };
            let new_target = match self.src.find_object(target, None)?.kind() {
                Some(ObjectType::Commit) => self.commits.get(&target).copied(),
                Some(ObjectType::Tag) => self.rewrite_tag(target)?,
                _ => None,
            };
            match new_target {
                Some(t) => {
                    self.dst.reference(&name, t, true, "transform")?;
                }
                None => log::warn!("{name} does not point at a commit; dropped"),
            }
        }
        for (name, target) in symbolic {
            if name.starts_with("refs/") && self.dst.find_reference(&target).is_ok() {
                self.dst.reference_symbolic(&name, &target, true, "transform")?;
            }
        }
        let head = self.src.find_reference("HEAD")?;
        match head.symbolic_target().ok().flatten() {
            Some(target) => self.dst.set_head(target)?,
            None => {
                if let Some(mapped) = head.target().and_then(|t| self.commits.get(&t)) {
                    self.dst.set_head_detached(*mapped)?;
                }
            }
        }
        Ok(())
    }
}

/// Commit object with new `tree`/`parent` lines; everything else is kept
/// byte for byte except signatures, which a new tree invalidates.
pub(crate) fn rewrite_commit_object(raw: &[u8], tree: Oid, parents: &[Oid]) -> Option<Vec<u8>> {
    let split = raw.windows(2).position(|w| w == b"\n\n").map(|p| p + 1).unwrap_or(raw.len());
    let (header, body) = raw.split_at(split);
    let mut out = format!("tree {tree}\n").into_bytes();
    for p in parents {
        out.extend_from_slice(format!("parent {p}\n").as_bytes());
    }
    let mut dropping = false;
    let mut saw_tree = false;
    for line in header.split_inclusive(|b| *b == b'\n') {
        if line.starts_with(b" ") {
            if !dropping {
                out.extend_from_slice(line);
            }
            continue;
        }
        dropping = false;
        if line.starts_with(b"tree ") {
            saw_tree = true;
        } else if line.starts_with(b"parent ") {
        } else if line.starts_with(b"gpgsig") || line.starts_with(b"mergetag ") {
            dropping = true;
        } else {
            out.extend_from_slice(line);
        }
    }
    out.extend_from_slice(body);
    saw_tree.then_some(out)
}

pub(crate) fn rewrite_tag_object(raw: &[u8], target: Oid) -> Option<Vec<u8>> {
    let end = raw.iter().position(|b| *b == b'\n')?;
    raw.starts_with(b"object ").then(|| {
        let mut out = format!("object {target}").into_bytes();
        out.extend_from_slice(&raw[end..]);
        out
    })
}

fn prepare_destination(destination: &Path) -> Result<Repository, HistoryError> {
    let io = |e| HistoryError::Io(destination.display().to_string(), e);
    if destination.exists() {
        let mut entries = std::fs::read_dir(destination).map_err(io)?;
        if entries.next().is_some() {
            return Err(HistoryError::DestinationNotEmpty(destination.display().to_string()));
        }
    }
    Ok(Repository::init_bare(destination)?)
}

/// Rewrites every commit reachable from the source's refs into a new bare
/// repository at `destination`, which must be absent or empty.
pub fn transform_repository(
    source: &Path,
    destination: &Path,
    options: &TransformOptions,
) -> Result<TransformReport, HistoryError> {
    let src = Repository::open(source)?;
    let dst = prepare_destination(destination)?;
    let mut walk = src.revwalk()?;
    walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
    for tip in tip_commits(&src)? {
        walk.push(tip)?;
    }
    let mut rewriter = Rewriter {
        src: &src,
        dst: &dst,
        options,
        java: HashMap::new(),
        trees: HashMap::new(),
        copied: HashSet::new(),
        commits: HashMap::new(),
        report: TransformReport::default(),
    };
    for oid in walk {
        let oid = oid?;
        let new = rewriter.rewrite_commit(oid)?;
        rewriter.report.commit_map.insert(oid.to_string(), new.to_string());
        rewriter.report.commits_processed += 1;
        if rewriter.report.commits_processed.is_multiple_of(1000) {
            log::info!("{} commits transformed", rewriter.report.commits_processed);
        }
    }
    rewriter.recreate_refs()?;
    Ok(rewriter.report)
}

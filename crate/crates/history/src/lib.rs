//! Git side of the pipeline: rewriting a history into method files,
//! checking out snapshots, and linking bug reports to fixing commits.

mod link;
mod snapshot;
mod transform;

pub use link::{
    derive_oracle, link_bugs, module_commit_times, select_snapshot, BugCommitLinks, VersionCatalog,
    VersionEntry,
};
pub use snapshot::{checkout_snapshot, is_module_path, resolve_commit};
pub use transform::{
    transform_repository, transform_tree, FileTree, ParseFailure, ParseFailurePolicy,
    TransformOptions, TransformReport, TreeTransform,
};

use irbl_core::BugId;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("git storage: {0}")]
    Storage(#[from] git2::Error),
    #[error("commit {0} reached before its parent {1}")]
    Cycle(String, String),
    #[error("unknown version `{0}`")]
    UnknownVersion(String),
    #[error("destination `{0}` exists and is not empty")]
    DestinationNotEmpty(String),
    #[error("{0} has no modules at this granularity")]
    BugExcluded(BugId),
    #[error("{0} is not linked to any commit")]
    NoLinks(BugId),
    #[error("invalid version catalog: {0}")]
    InvalidCatalog(String),
    #[error("malformed object {0}: {1}")]
    MalformedObject(String, String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Model(#[from] irbl_core::ModelError),
}

//! The `irbl` pipeline: `transform` rewrites a history into method files,
//! `link` ties bug reports to fixing commits, `localize` writes one ranked
//! list per bug, technique and granularity, and `eval` summarizes them.
//!
//! Output layout under `paths.output_dir`:
//!
//! ```text
//! transform.json                         transform report
//! links/<granularity>.json               linked commits and oracle per bug
//! manifest.json                          resolved config and admitted bugs
//! excluded.csv                           bug,reason
//! oracles/<granularity>.json             oracle modules of admitted bugs
//! snapshots/<granularity>/<version>.csv  module_id,loc
//! ranked/<technique>/<granularity>/<BUG>.csv
//! eval/summary.csv, eval/comparison.md
//! ```

pub mod config;
mod eval;
pub mod io;
mod link;
mod localize;

use std::path::Path;

use irbl_history::HistoryError;
use thiserror::Error;

pub use config::{Resolved, RunConfig};
pub use eval::{eval, EvalSummary};
pub use link::{link, transform};
pub use localize::{localize, LocalizeSummary, Manifest};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad or missing input, or an environment problem.
    #[error("{0}")]
    Input(String),
    /// A broken internal invariant.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<HistoryError> for CliError {
    fn from(e: HistoryError) -> Self {
        match e {
            HistoryError::Model(m) => CliError::Internal(m.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

pub(crate) fn open_repo(path: &Path) -> Result<git2::Repository, CliError> {
    git2::Repository::open(path).map_err(|e| CliError::Input(format!("{}: {}", path.display(), e.message())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transform,
    Link,
    Localize,
    Eval,
}

/// Loads the config and runs one subcommand on a pool of `jobs` workers
/// (0 picks the number of CPUs). Returns the text report for stdout.
pub fn run(command: Command, config: &Path, jobs: usize) -> Result<String, CliError> {
    let cfg = Resolved::load(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    pool.install(|| match command {
        Command::Transform => transform(&cfg).map(|r| {
            format!(
                "commits processed: {}\nfiles split: {}\nmethod files emitted: {}\nparse failures: {}\n",
                r.commits_processed,
                r.files_split,
                r.method_files_emitted,
                r.parse_failures.len()
            )
        }),
        Command::Link => link(&cfg).map(|counts| {
            counts
                .iter()
                .map(|(g, (linked, total))| format!("{g}: {linked} of {total} bugs have an oracle\n"))
                .collect()
        }),
        Command::Localize => localize(&cfg).map(|s| format!("admitted: {}\nexcluded: {}\n", s.admitted, s.excluded)),
        Command::Eval => eval(&cfg).map(|s| format!("summaries: {}\n", s.summaries)),
    })
}

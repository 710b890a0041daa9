use std::collections::{BTreeMap, BTreeSet};

use irbl_core::{BugId, Granularity};
use irbl_history::{derive_oracle, link_bugs, transform_repository, HistoryError, TransformReport};
use serde::{Deserialize, Serialize};

use crate::io::{read_bug_reports, write_json};
use crate::{open_repo, CliError, Resolved};

/// Rewrites `source_repo` into `transformed_repo` and writes
/// `transform.json` when an output directory is configured.
pub fn transform(cfg: &Resolved) -> Result<TransformReport, CliError> {
    let source = cfg.existing("source_repo", &cfg.run.paths.source_repo)?;
    let destination = cfg.configured("transformed_repo", &cfg.run.paths.transformed_repo)?;
    let report = transform_repository(&source, &destination, &cfg.run.transform)?;
    for f in &report.parse_failures {
        log::warn!("{} in {}: not split ({})", f.path, f.commit, f.message);
    }
    if let Some(out) = &cfg.run.paths.output_dir {
        write_json(&out.join("transform.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub commits: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// Writes `links/<granularity>.json`. Returns, per level, how many bugs
/// got an oracle out of how many were read.
pub fn link(cfg: &Resolved) -> Result<BTreeMap<Granularity, (usize, usize)>, CliError> {
    let bugs_path = cfg.existing("bug_reports", &cfg.run.paths.bug_reports)?;
    let out = cfg.output_dir()?;
    let repos = cfg
        .run
        .granularities
        .iter()
        .map(|&g| Ok((g, cfg.repo_for(g)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let bugs = read_bug_reports(&bugs_path)?;

    let mut counts = BTreeMap::new();
    for (g, path) in repos {
        let repo = open_repo(&path)?;
        let links = link_bugs(&repo, &bugs)?;
        let mut records: BTreeMap<BugId, LinkRecord> = BTreeMap::new();
        let mut linked = 0;
        for bug in &bugs {
            let mut record = LinkRecord { commits: links[&bug.id].clone(), oracle: None, reason: None };
            match derive_oracle(&bug.id, &links, &repo, g) {
                Ok(o) => {
                    linked += 1;
                    record.oracle = Some(o.modules);
                }
                Err(e @ (HistoryError::NoLinks(_) | HistoryError::BugExcluded(_))) => {
                    record.reason = Some(e.to_string());
                }
                Err(e) => return Err(e.into()),
            }
            records.insert(bug.id.clone(), record);
        }
        write_json(&out.join("links").join(format!("{g}.json")), &records)?;
        counts.insert(g, (linked, bugs.len()));
    }
    Ok(counts)
}

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use git2::Repository;
use irbl_core::ir::{build_index, TOKENIZER_VERSION};
use irbl_core::techniques::{localize as rank, LocalizeInput, ModuleHistory, TextMode};
use irbl_core::{BugId, BugReport, DocField, Granularity, OracleSet, RankedList};
use irbl_history::{
    checkout_snapshot, derive_oracle, link_bugs, module_commit_times, select_snapshot, HistoryError,
    TransformReport, VersionCatalog, VersionEntry,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::io::{csv_bytes, ranked_csv, read_bug_reports, read_catalog, read_json, write_file, write_json};
use crate::{open_repo, CliError, Resolved};

/// `manifest.json`: the resolved configuration and, for every admitted bug,
/// the version searched at each level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub project: String,
    pub techniques: Vec<String>,
    pub granularities: Vec<Granularity>,
    pub tokenizer_version: String,
    pub config: serde_json::Value,
    pub bugs: BTreeMap<BugId, BTreeMap<Granularity, String>>,
    pub excluded: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalizeSummary {
    pub admitted: usize,
    pub excluded: usize,
}

struct BugLevel {
    version: String,
    /// Oracle modules present in the searched version.
    oracle: BTreeSet<String>,
    /// One list per configured technique, in config order.
    ranked: Vec<RankedList>,
}

#[derive(Default)]
struct LevelOutcome {
    results: BTreeMap<BugId, BugLevel>,
    failures: BTreeMap<BugId, String>,
    loc: BTreeMap<String, BTreeMap<String, usize>>,
}

/// Runs every configured technique at every configured level and writes the
/// ranked lists of admitted bugs. A bug is admitted only when each
/// technique produced a ranked list at each level against a non-empty
/// oracle; the others go to `excluded.csv`.
pub fn localize(cfg: &Resolved) -> Result<LocalizeSummary, CliError> {
    let bugs_path = cfg.existing("bug_reports", &cfg.run.paths.bug_reports)?;
    let catalog_path = cfg.existing("catalog", &cfg.run.paths.catalog)?;
    let repos = cfg
        .run
        .granularities
        .iter()
        .map(|&g| Ok((g, cfg.repo_for(g)?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let out = cfg.output_dir()?;
    let reports = read_bug_reports(&bugs_path)?;
    let catalog = read_catalog(&catalog_path)?;
    let commit_map = read_commit_map(&out)?;

    let mut excluded: BTreeMap<BugId, String> = BTreeMap::new();
    let mut bugs = Vec::new();
    for bug in reports {
        match bug.validate() {
            Ok(()) => bugs.push(bug),
            Err(e) => {
                log::warn!("{}: {e}", bug.id);
                excluded.insert(bug.id.clone(), e.to_string());
            }
        }
    }

    let mut levels = BTreeMap::new();
    for (g, path) in repos {
        let repo = open_repo(&path)?;
        let outcome = localize_level(cfg, g, &repo, &bugs, &catalog, commit_map.as_ref())?;
        for (bug, reason) in &outcome.failures {
            log::warn!("{bug}: {reason}");
        }
        levels.insert(g, outcome);
    }

    let mut admitted = Vec::new();
    for bug in &bugs {
        let reason = levels.values().find_map(|level| {
            if let Some(reason) = level.failures.get(&bug.id) {
                Some(reason.clone())
            } else if !level.results.contains_key(&bug.id) {
                Some("not localized".to_string())
            } else {
                None
            }
        });
        match reason {
            Some(reason) => {
                excluded.insert(bug.id.clone(), reason);
            }
            None => admitted.push(bug.id.clone()),
        }
    }
    if admitted.is_empty() {
        log::warn!("no bug was admitted");
    }

    for stale in ["ranked", "oracles", "snapshots"] {
        let dir = out.join(stale);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
    }

    let mut manifest_bugs: BTreeMap<BugId, BTreeMap<Granularity, String>> = BTreeMap::new();
    for (&g, level) in &levels {
        let mut oracles: BTreeMap<&BugId, &BTreeSet<String>> = BTreeMap::new();
        let mut versions = BTreeSet::new();
        for id in &admitted {
            let r = &level.results[id];
            manifest_bugs.entry(id.clone()).or_default().insert(g, r.version.clone());
            oracles.insert(id, &r.oracle);
            versions.insert(r.version.as_str());
            for (t, ranked) in cfg.techniques.iter().zip(&r.ranked) {
                let path = out.join("ranked").join(t.name()).join(g.as_str()).join(format!("{id}.csv"));
                write_file(&path, &ranked_csv(ranked)?)?;
            }
        }
        write_json(&out.join("oracles").join(format!("{g}.json")), &oracles)?;
        for version in versions {
            let rows = level.loc[version].iter().map(|(m, loc)| [m.clone(), loc.to_string()]);
            let path = out.join("snapshots").join(g.as_str()).join(format!("{version}.csv"));
            write_file(&path, &csv_bytes(&["module_id", "loc"], rows)?)?;
        }
    }

    let rows = excluded.iter().map(|(id, reason)| [id.to_string(), reason.clone()]);
    write_file(&out.join("excluded.csv"), &csv_bytes(&["bug", "reason"], rows)?)?;
    let manifest = Manifest {
        project: cfg.run.project.clone(),
        techniques: cfg.run.techniques.clone(),
        granularities: cfg.run.granularities.clone(),
        tokenizer_version: TOKENIZER_VERSION.to_string(),
        config: serde_json::to_value(cfg).map_err(|e| CliError::Internal(e.to_string()))?,
        bugs: manifest_bugs,
        excluded: excluded.len(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(LocalizeSummary { admitted: admitted.len(), excluded: excluded.len() })
}

fn read_commit_map(out: &Path) -> Result<Option<BTreeMap<String, String>>, CliError> {
    let path = out.join("transform.json");
    if !path.exists() {
        return Ok(None);
    }
    let report: TransformReport = read_json(&path)?;
    Ok(Some(report.commit_map))
}

/// The ref naming `entry` in `repo`. A commit id of the original history is
/// translated through the transform report's commit map.
fn version_ref(
    cfg: &Resolved,
    repo: &Repository,
    granularity: Granularity,
    entry: &VersionEntry,
    commit_map: Option<&BTreeMap<String, String>>,
) -> Option<String> {
    if repo.revparse_single(&entry.git_ref).is_ok() {
        return Some(entry.git_ref.clone());
    }
    if granularity != Granularity::Method {
        return None;
    }
    let source = Repository::open(cfg.run.paths.source_repo.as_ref()?).ok()?;
    let original = source.revparse_single(&entry.git_ref).ok()?.peel_to_commit().ok()?.id().to_string();
    commit_map?.get(&original).cloned()
}

fn localize_level(
    cfg: &Resolved,
    g: Granularity,
    repo: &Repository,
    bugs: &[BugReport],
    catalog: &VersionCatalog,
    commit_map: Option<&BTreeMap<String, String>>,
) -> Result<LevelOutcome, CliError> {
    let mut outcome = LevelOutcome::default();
    let links = link_bugs(repo, bugs)?;
    let mut oracles: BTreeMap<BugId, OracleSet> = BTreeMap::new();
    for bug in bugs {
        match derive_oracle(&bug.id, &links, repo, g) {
            Ok(o) => {
                oracles.insert(bug.id.clone(), o);
            }
            Err(e @ (HistoryError::NoLinks(_) | HistoryError::BugExcluded(_))) => {
                outcome.failures.insert(bug.id.clone(), format!("{g}: {e}"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let past: Vec<(BugReport, OracleSet)> = bugs
        .iter()
        .filter_map(|b| Some((b.clone(), oracles.get(&b.id)?.clone())))
        .collect();

    let configs: Vec<_> = cfg.techniques.iter().map(|&t| (t, cfg.technique_config(t))).collect();
    let history = if configs.iter().any(|(_, c)| c.gamma > 0.0) {
        module_commit_times(repo, g)?
    } else {
        ModuleHistory::new()
    };
    let mut fields = BTreeSet::new();
    for (_, c) in &configs {
        match c.text_mode {
            TextMode::Rvsm => fields.insert(DocField::Content),
            TextMode::Structured => {
                fields.extend(DocField::STRUCTURAL);
                true
            }
        };
    }
    let fields: Vec<DocField> = fields.into_iter().collect();

    let mut groups: BTreeMap<&str, Vec<&BugReport>> = BTreeMap::new();
    for (bug, _) in &past {
        groups.entry(select_snapshot(bug, catalog).label.as_str()).or_default().push(bug);
    }
    for (label, members) in groups {
        let entry = catalog.get(label).expect("label comes from the catalog");
        let snapshot = version_ref(cfg, repo, g, entry, commit_map)
            .ok_or_else(|| format!("{g}: version {label}: ref `{}` not found", entry.git_ref))
            .and_then(|r| {
                checkout_snapshot(repo, &r, &cfg.run.project, label, g)
                    .map_err(|e| format!("{g}: version {label}: {e}"))
            })
            .and_then(|s| {
                if s.is_empty() {
                    Err(format!("{g}: version {label} has no modules"))
                } else {
                    Ok(s)
                }
            });
        let snapshot = match snapshot {
            Ok(s) => s,
            Err(reason) => {
                for bug in members {
                    outcome.failures.insert(bug.id.clone(), reason.clone());
                }
                continue;
            }
        };
        let index = build_index(&snapshot, &fields).map_err(|e| CliError::Internal(e.to_string()))?;

        let ranked: Vec<(BugId, Result<BugLevel, String>)> = members
            .par_iter()
            .map(|bug| {
                let oracle: BTreeSet<String> = oracles[&bug.id]
                    .modules
                    .iter()
                    .filter(|m| snapshot.contains(m))
                    .cloned()
                    .collect();
                if oracle.is_empty() {
                    return (bug.id.clone(), Err(format!("{g}: no oracle module exists in version {label}")));
                }
                let input = LocalizeInput { bug, snapshot: &snapshot, index: &index, past_bugs: &past, history: &history };
                let lists = configs
                    .iter()
                    .map(|(t, c)| match rank(&input, c) {
                        Ok(r) if !r.is_empty() => Ok(r),
                        Ok(_) => Err(format!("{g}/{t}: empty ranked list")),
                        Err(e) => Err(format!("{g}/{t}: {e}")),
                    })
                    .collect::<Result<Vec<_>, String>>();
                let level = lists.map(|ranked| BugLevel { version: label.to_string(), oracle, ranked });
                (bug.id.clone(), level)
            })
            .collect();
        for (id, result) in ranked {
            match result {
                Ok(level) => {
                    outcome.results.insert(id, level);
                }
                Err(reason) => {
                    outcome.failures.insert(id, reason);
                }
            }
        }
        outcome.loc.insert(label.to_string(), snapshot.loc_by_module());
    }
    Ok(outcome)
}

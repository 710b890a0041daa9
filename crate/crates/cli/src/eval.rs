use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use irbl_core::metrics::{render_comparison_markdown, summarize_project, write_summary_csv, BugResult, ProjectSummary};
use irbl_core::{BugId, OracleSet, RankedEntry, RankedList};

use crate::io::{read_json, read_ranked_ids, write_file};
use crate::{CliError, Manifest, Resolved};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSummary {
    pub summaries: usize,
}

/// Summarizes the localize outputs named by `eval_inputs` (or the output
/// directory) into `eval/summary.csv` and `eval/comparison.md`.
pub fn eval(cfg: &Resolved) -> Result<EvalSummary, CliError> {
    let out = cfg.output_dir()?;
    let inputs = if cfg.run.eval_inputs.is_empty() { vec![out.clone()] } else { cfg.run.eval_inputs.clone() };

    let mut summaries = Vec::new();
    let mut projects = BTreeSet::new();
    for dir in &inputs {
        let manifest: Manifest = read_json(&dir.join("manifest.json"))?;
        if !projects.insert(manifest.project.clone()) {
            return Err(CliError::Input(format!("project {} appears in two eval inputs", manifest.project)));
        }
        summaries.extend(summarize_dir(cfg, dir, &manifest)?);
    }

    let internal = |e: irbl_core::metrics::MetricsError| CliError::Internal(e.to_string());
    let mut csv = Vec::new();
    write_summary_csv(&summaries, &mut csv).map_err(internal)?;
    let md = render_comparison_markdown(&summaries, &cfg.run.techniques, cfg.run.compare_k).map_err(internal)?;
    write_file(&out.join("eval").join("summary.csv"), &csv)?;
    write_file(&out.join("eval").join("comparison.md"), md.as_bytes())?;
    Ok(EvalSummary { summaries: summaries.len() })
}

fn read_loc(path: &Path) -> Result<BTreeMap<String, usize>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let mut loc = BTreeMap::new();
    for record in reader.deserialize() {
        let (module, lines): (String, usize) = record.map_err(|e| bad(e.to_string()))?;
        loc.insert(module, lines);
    }
    Ok(loc)
}

fn summarize_dir(cfg: &Resolved, dir: &Path, manifest: &Manifest) -> Result<Vec<ProjectSummary>, CliError> {
    let mut summaries = Vec::new();
    for &g in cfg.run.granularities.iter().filter(|g| manifest.granularities.contains(g)) {
        let oracles: BTreeMap<BugId, BTreeSet<String>> = read_json(&dir.join("oracles").join(format!("{g}.json")))?;
        let mut loc: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
        for technique in cfg.run.techniques.iter().filter(|t| manifest.techniques.contains(t)) {
            let mut results = Vec::new();
            for (bug, versions) in &manifest.bugs {
                let missing = |what: &str| CliError::Input(format!("{}: {bug} has no {what}", dir.display()));
                let version = versions.get(&g).ok_or_else(|| missing(&format!("{g} version")))?;
                if !loc.contains_key(version) {
                    let path = dir.join("snapshots").join(g.as_str()).join(format!("{version}.csv"));
                    loc.insert(version.clone(), read_loc(&path)?);
                }
                let path = dir.join("ranked").join(technique).join(g.as_str()).join(format!("{bug}.csv"));
                results.push(BugResult {
                    bug: bug.clone(),
                    ranked: ranked_from_ids(bug, read_ranked_ids(&path)?)?,
                    oracle: OracleSet {
                        bug: bug.clone(),
                        granularity: g,
                        modules: oracles.get(bug).cloned().ok_or_else(|| missing(&format!("{g} oracle")))?,
                    },
                    loc_by_module: loc[version].clone(),
                });
            }
            if results.is_empty() {
                continue;
            }
            let summary = summarize_project(&manifest.project, &results, technique, g, &cfg.run.k_values)
                .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
            summaries.push(summary);
        }
    }
    Ok(summaries)
}

/// Printed scores are rounded, so ties can appear that were not ties when
/// ranked; the metrics only read the order, which the file fixes.
fn ranked_from_ids(bug: &BugId, ids: Vec<String>) -> Result<RankedList, CliError> {
    let n = ids.len();
    let entries = ids
        .into_iter()
        .enumerate()
        .map(|(i, module_id)| RankedEntry { module_id, score: (n - i) as f64 })
        .collect();
    RankedList::from_sorted(bug.clone(), entries).map_err(|e| CliError::Input(e.to_string()))
}

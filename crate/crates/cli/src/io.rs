use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use irbl_core::{BugReport, RankedList};
use irbl_history::{VersionCatalog, VersionEntry};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::CliError;

/// Reads a JSON array or newline-delimited JSON records.
pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_records(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_records<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, String> {
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(text).map_err(|e| e.to_string());
    }
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}

pub fn read_bug_reports(path: &Path) -> Result<Vec<BugReport>, CliError> {
    let mut bugs: Vec<BugReport> = read_records(path)?;
    let mut seen = BTreeSet::new();
    for bug in &bugs {
        if !seen.insert(bug.id.clone()) {
            return Err(CliError::Input(format!("{}: {} appears twice", path.display(), bug.id)));
        }
    }
    bugs.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(bugs)
}

pub fn read_catalog(path: &Path) -> Result<VersionCatalog, CliError> {
    let entries: Vec<VersionEntry> = read_records(path)?;
    for e in &entries {
        // labels become file names
        if e.label.is_empty() || e.label.starts_with('.') || e.label.contains(['/', '\\']) {
            return Err(CliError::Input(format!("{}: unusable version label `{}`", path.display(), e.label)));
        }
    }
    VersionCatalog::new(entries).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// CSV text from a header and rows.
pub fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let internal = |e: csv::Error| CliError::Internal(e.to_string());
    w.write_record(header).map_err(internal)?;
    for row in rows {
        w.write_record(row).map_err(internal)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(e.to_string()))
}

/// `rank,module_id,score` with six decimals.
pub fn ranked_csv(ranked: &RankedList) -> Result<Vec<u8>, CliError> {
    csv_bytes(
        &["rank", "module_id", "score"],
        ranked.entries().iter().enumerate().map(|(i, e)| {
            [(i + 1).to_string(), e.module_id.clone(), format!("{:.6}", e.score)]
        }),
    )
}

/// Module ids of a ranked-list CSV, checking that ranks run 1, 2, ...
pub fn read_ranked_ids(path: &Path) -> Result<Vec<String>, CliError> {
    let bad = |msg: String| CliError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = reader.headers().map_err(|e| bad(e.to_string()))?;
    if header != vec!["rank", "module_id", "score"] {
        return Err(bad("expected header rank,module_id,score".into()));
    }
    let mut ids = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.get(0) != Some((i + 1).to_string().as_str()) {
            return Err(bad(format!("row {} has rank {:?}", i + 1, record.get(0))));
        }
        ids.push(record.get(1).unwrap_or_default().to_string());
    }
    Ok(ids)
}

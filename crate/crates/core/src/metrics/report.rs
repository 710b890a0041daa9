use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use super::stats::{cliffs_delta, median, wilcoxon_signed_rank, EffectSize};
use super::{MetricsError, ProjectSummary};
use crate::model::Granularity;

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn out_err(e: impl std::fmt::Display) -> MetricsError {
    MetricsError::Output(e.to_string())
}

/// One row per summary, sorted by project, technique and granularity.
/// Columns: `project,technique,granularity,map,mrr,top<k>...,bugs`.
pub fn write_summary_csv<W: Write>(summaries: &[ProjectSummary], writer: W) -> Result<(), MetricsError> {
    let k_values: Vec<usize> = summaries.first().map(|s| s.top_k_loc.keys().copied().collect()).unwrap_or_default();
    if summaries.iter().any(|s| !s.top_k_loc.keys().copied().eq(k_values.iter().copied())) {
        return Err(MetricsError::InconsistentKValues);
    }
    let mut rows: Vec<&ProjectSummary> = summaries.iter().collect();
    rows.sort_by(|a, b| (&a.project, &a.technique, a.granularity).cmp(&(&b.project, &b.technique, b.granularity)));

    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec!["project".to_string(), "technique".into(), "granularity".into(), "map".into(), "mrr".into()];
    header.extend(k_values.iter().map(|k| format!("top{k}")));
    header.push("bugs".into());
    csv.write_record(&header).map_err(out_err)?;
    for s in rows {
        let mut record = vec![
            s.project.clone(),
            s.technique.clone(),
            s.granularity.to_string(),
            fixed(s.map_value),
            fixed(s.mrr_value),
        ];
        record.extend(s.top_k_loc.values().map(|v| fixed(*v)));
        record.push(s.bug_count.to_string());
        csv.write_record(&record).map_err(out_err)?;
    }
    csv.flush().map_err(out_err)
}

/// File versus method level top-k LOC of one technique, paired by project.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComparison {
    pub projects: usize,
    pub file_median: f64,
    pub method_median: f64,
    /// `None` when every project scored the same at both levels.
    pub p_value: Option<f64>,
    /// Cliff's delta of method over file level.
    pub delta: f64,
    pub effect: EffectSize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TechniqueComparison {
    pub technique: String,
    /// `None` when no project has results at both levels.
    pub comparison: Option<LevelComparison>,
}

/// Pairs each technique's top-`k` LOC at file and method level across
/// projects. Techniques come out in the order given.
pub fn compare_levels(
    summaries: &[ProjectSummary],
    techniques: &[String],
    k: usize,
) -> Result<Vec<TechniqueComparison>, MetricsError> {
    let value = |s: &ProjectSummary| s.top_k_loc.get(&k).copied();
    techniques
        .iter()
        .map(|technique| {
            let mut file: BTreeMap<&str, f64> = BTreeMap::new();
            let mut method: BTreeMap<&str, f64> = BTreeMap::new();
            for s in summaries.iter().filter(|s| &s.technique == technique) {
                let Some(v) = value(s) else { continue };
                match s.granularity {
                    Granularity::File => file.insert(&s.project, v),
                    Granularity::Method => method.insert(&s.project, v),
                };
            }
            let (xs, ys): (Vec<f64>, Vec<f64>) = file
                .iter()
                .filter_map(|(p, f)| Some((*f, *method.get(p)?)))
                .unzip();
            if xs.is_empty() {
                return Ok(TechniqueComparison { technique: technique.clone(), comparison: None });
            }
            let p_value = match wilcoxon_signed_rank(&ys, &xs) {
                Ok(r) => Some(r.p_value),
                Err(MetricsError::DegenerateSample) => None,
                Err(e) => return Err(e),
            };
            let (delta, effect) = cliffs_delta(&ys, &xs)?;
            Ok(TechniqueComparison {
                technique: technique.clone(),
                comparison: Some(LevelComparison {
                    projects: xs.len(),
                    file_median: median(&xs).expect("non-empty"),
                    method_median: median(&ys).expect("non-empty"),
                    p_value,
                    delta,
                    effect,
                }),
            })
        })
        .collect()
}

fn three(v: f64) -> String {
    format!("{v:.3}")
}

/// Markdown with a MAP table (projects by technique, file then method
/// level) and the top-`k` LOC level comparison.
pub fn render_comparison_markdown(
    summaries: &[ProjectSummary],
    techniques: &[String],
    k: usize,
) -> Result<String, MetricsError> {
    let mut md = String::new();
    let levels = [Granularity::File, Granularity::Method];
    let projects: BTreeSet<&str> = summaries.iter().map(|s| s.project.as_str()).collect();
    let lookup: BTreeMap<(&str, &str, Granularity), &ProjectSummary> = summaries
        .iter()
        .map(|s| ((s.project.as_str(), s.technique.as_str(), s.granularity), s))
        .collect();

    let _ = writeln!(md, "## MAP\n");
    let mut header = String::from("| Project |");
    let mut rule = String::from("|---|");
    for level in levels {
        for t in techniques {
            let _ = write!(header, " {t} ({level}) |");
            rule.push_str("---:|");
        }
    }
    let _ = writeln!(md, "{header}\n{rule}");
    for project in &projects {
        let mut row = format!("| {project} |");
        for level in levels {
            for t in techniques {
                let cell = lookup
                    .get(&(*project, t.as_str(), level))
                    .map_or("n/a".to_string(), |s| three(s.map_value));
                let _ = write!(row, " {cell} |");
            }
        }
        let _ = writeln!(md, "{row}");
    }

    let _ = writeln!(md, "\n## Median of top-{k} LOC\n");
    let _ = writeln!(md, "| Technique | File level | Method level | p-value | Cliff's d |");
    let _ = writeln!(md, "|---|---:|---:|---:|---|");
    for row in compare_levels(summaries, techniques, k)? {
        match row.comparison {
            Some(c) => {
                let p = c.p_value.map_or("n/a".to_string(), three);
                let _ = writeln!(
                    md,
                    "| {} | {} | {} | {} | {} ({}) |",
                    row.technique,
                    three(c.file_median),
                    three(c.method_median),
                    p,
                    three(c.delta),
                    c.effect
                );
            }
            None => {
                let _ = writeln!(md, "| {} | n/a | n/a | n/a | n/a |", row.technique);
            }
        }
    }
    Ok(md)
}

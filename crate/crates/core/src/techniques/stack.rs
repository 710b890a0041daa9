use std::collections::BTreeMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::java::parse_method_file_name;
use crate::model::{Granularity, Snapshot};

/// One `at pkg.Class.method(File.java:123)` line of a Java stack trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackFrame {
    /// Runtime class name, possibly with `$` inner-class parts.
    pub fq_class: String,
    pub method_name: String,
    pub file_name: String,
    pub line: u32,
    /// 1-based position among all frames of the report.
    pub rank: usize,
}

static FRAME: LazyLock<Regex> = LazyLock::new(|| {
    // `at` is optional so frames quoted inline in prose are found too;
    // optional `module@version/` prefix as printed by newer JVMs
    Regex::new(
        r"(?:\bat\s+)?(?:[\w.$@-]+/)?\b([A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)*)\.([\w$]+|<init>|<clinit>)\s*\(\s*([\w$]+\.java):(\d+)\s*\)",
    )
    .unwrap()
});

impl StackFrame {
    /// Last dotted component with any `$` suffix removed.
    pub fn simple_class(&self) -> &str {
        let last = self.fq_class.rsplit('.').next().unwrap_or(&self.fq_class);
        last.split('$').next().unwrap_or(last)
    }

    /// Name of the source method this frame executes. Constructors are
    /// reported as `<init>` and map to the innermost class name; static
    /// initializers have no method file and map to nothing.
    pub fn source_method_name(&self) -> Option<&str> {
        match self.method_name.as_str() {
            "<clinit>" => None,
            "<init>" => {
                let last = self.fq_class.rsplit('.').next().unwrap_or(&self.fq_class);
                let inner = last.rsplit('$').next().unwrap_or(last);
                (!inner.is_empty() && !inner.starts_with(|c: char| c.is_ascii_digit())).then_some(inner)
            }
            name => Some(name),
        }
    }
}

/// Every frame with a source location, across all `Caused by:` sections,
/// ranked by order of appearance.
pub fn parse_stack_traces(description: &str) -> Vec<StackFrame> {
    FRAME
        .captures_iter(description)
        .filter_map(|c| {
            let line: u32 = c[4].parse().ok().filter(|&l| l > 0)?;
            Some((c[1].to_string(), c[2].to_string(), c[3].to_string(), line))
        })
        .enumerate()
        .map(|(i, (fq_class, method_name, file_name, line))| StackFrame {
            fq_class,
            method_name,
            file_name,
            line,
            rank: i + 1,
        })
        .collect()
}

/// `1 / rank` boost for modules named by the first `max_frames` frames.
///
/// Files match on their base name. Method files match on the outermost class
/// of their chain and on the method name, so every overload is boosted.
pub fn stack_trace_boost(
    frames: &[StackFrame],
    snapshot: &Snapshot,
    granularity: Granularity,
    max_frames: usize,
) -> BTreeMap<String, f64> {
    let mut boost: BTreeMap<String, f64> = BTreeMap::new();
    let frames: Vec<&StackFrame> = frames.iter().filter(|f| f.rank <= max_frames).collect();
    if frames.is_empty() {
        return boost;
    }
    for doc in snapshot.docs() {
        let best = match granularity {
            Granularity::File => {
                let base = doc.id.rsplit('/').next().unwrap_or(&doc.id);
                frames.iter().filter(|f| f.file_name == base).map(|f| f.rank).min()
            }
            Granularity::Method => {
                let Some(name) = parse_method_file_name(&doc.id) else {
                    continue;
                };
                frames
                    .iter()
                    .filter(|f| {
                        f.simple_class() == name.outer_class()
                            && f.source_method_name() == Some(name.method_name.as_str())
                    })
                    .map(|f| f.rank)
                    .min()
            }
        };
        if let Some(rank) = best {
            boost.insert(doc.id.clone(), 1.0 / rank as f64);
        }
    }
    boost
}

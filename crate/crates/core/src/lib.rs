//! Building blocks for information-retrieval bug localization at file and
//! method granularity.
//!
//! * [`model`]: bug ids, reports, module documents, snapshots, oracles, rankings
//! * [`java`]: method extraction and method-file rendering
//! * [`ir`]: tokenizer, TF-IDF index, cosine / rVSM / structured similarity
//! * [`techniques`]: BugLocator, BLUiR, BRTracer, AmaLgam and BLIA as presets
//!   of one scoring engine
//! * [`metrics`]: AP/RR, top-k LOC, Wilcoxon signed-rank, Cliff's delta, reports

pub mod ir;
pub mod java;
pub mod metrics;
pub mod model;
pub mod techniques;

pub use model::{
    count_loc, parse_bug_id, BugId, BugReport, DocField, Granularity, ModelError, ModuleDoc,
    OracleSet, RankedEntry, RankedList, Snapshot,
};

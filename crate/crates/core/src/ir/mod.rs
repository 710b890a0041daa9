//! Tokenization, per-field TF-IDF indexing and the base similarity functions
//! (plain cosine, rVSM and structured cosine sums).

mod index;
mod tokenize;

pub use index::{build_index, dot, snapshot_id, FieldIndex, Index, IndexKey, SparseVec, StructuredQuery};
pub use tokenize::{is_java_keyword, is_stopword, split_identifier, tokenize, TokenStream, TOKENIZER_VERSION};

use thiserror::Error;

use crate::model::DocField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("cannot index an empty corpus")]
    EmptyCorpus,
    #[error("document `{0}` is not indexed")]
    UnknownDoc(String),
    #[error("field {0:?} is not indexed")]
    FieldNotIndexed(DocField),
    #[error("index cache: {0}")]
    Cache(String),
}

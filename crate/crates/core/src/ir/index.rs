use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tokenize::{tokenize, TokenStream, TOKENIZER_VERSION};
use super::IrError;
use crate::model::{DocField, Snapshot};

/// Sparse vector sorted by term id.
pub type SparseVec = Vec<(u32, f64)>;

/// Term statistics and normalized TF-IDF vectors for one document field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldIndex {
    vocab: BTreeMap<String, u32>,
    df: Vec<u32>,
    idf: Vec<f64>,
    vectors: Vec<SparseVec>,
    term_counts: Vec<usize>,
}

fn log_tf(freq: u32) -> f64 {
    if freq == 0 {
        0.0
    } else {
        1.0 + f64::from(freq).ln()
    }
}

fn normalize(vec: &mut SparseVec) {
    let norm = vec.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in vec.iter_mut() {
            *w /= norm;
        }
    }
    vec.retain(|(_, w)| *w != 0.0);
}

fn term_frequencies(tokens: &TokenStream) -> BTreeMap<&str, u32> {
    let mut freq = BTreeMap::new();
    for term in tokens {
        *freq.entry(term.as_str()).or_insert(0) += 1;
    }
    freq
}

impl FieldIndex {
    fn build(streams: &[TokenStream]) -> Self {
        let n = streams.len() as f64;
        let freqs: Vec<BTreeMap<&str, u32>> = streams.iter().map(term_frequencies).collect();

        let terms: BTreeSet<&str> = freqs.iter().flat_map(|f| f.keys().copied()).collect();
        let vocab: BTreeMap<String, u32> = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), i as u32))
            .collect();

        let mut df = vec![0u32; vocab.len()];
        for freq in &freqs {
            for term in freq.keys() {
                df[vocab[*term] as usize] += 1;
            }
        }
        let idf: Vec<f64> = df.iter().map(|&d| (n / f64::from(d)).ln()).collect();

        let vectors = freqs
            .par_iter()
            .map(|freq| {
                // BTreeMap iteration is by term, and ids follow term order
                let mut vec: SparseVec = freq
                    .iter()
                    .map(|(term, &f)| {
                        let id = vocab[*term];
                        (id, log_tf(f) * idf[id as usize])
                    })
                    .collect();
                normalize(&mut vec);
                vec
            })
            .collect();

        FieldIndex {
            vocab,
            df,
            idf,
            vectors,
            term_counts: streams.iter().map(TokenStream::len).collect(),
        }
    }

    pub fn document_frequency(&self, term: &str) -> u32 {
        self.vocab.get(term).map(|&id| self.df[id as usize]).unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.vocab.get(term).map(|&id| self.idf[id as usize])
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_vector(&self, doc: usize) -> &SparseVec {
        &self.vectors[doc]
    }

    pub fn term_count(&self, doc: usize) -> usize {
        self.term_counts[doc]
    }

    /// Normalized TF-IDF vector of a query. Terms outside the vocabulary
    /// carry no weight.
    pub fn query_vector(&self, query: &TokenStream) -> SparseVec {
        let mut vec: SparseVec = term_frequencies(query)
            .into_iter()
            .filter_map(|(term, f)| {
                let id = *self.vocab.get(term)?;
                Some((id, log_tf(f) * self.idf[id as usize]))
            })
            .collect();
        vec.sort_by_key(|(id, _)| *id);
        normalize(&mut vec);
        vec
    }

    fn cosine(&self, query: &SparseVec, doc: usize) -> f64 {
        dot(query, &self.vectors[doc]).clamp(0.0, 1.0)
    }
}

/// Merge-join dot product of two id-sorted sparse vectors.
pub fn dot(a: &SparseVec, b: &SparseVec) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

/// Identifies a cached index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexKey {
    pub snapshot_id: String,
    pub tokenizer_version: String,
    pub fields: Vec<DocField>,
}

/// Per-field TF-IDF index over one snapshot.
///
/// Term weights are `(1 + ln f) * ln(N / df)`, document vectors are
/// L2-normalized per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Index {
    key: IndexKey,
    doc_ids: Vec<String>,
    fields: BTreeMap<DocField, FieldIndex>,
}

/// `project@version/granularity`.
pub fn snapshot_id(snapshot: &Snapshot) -> String {
    format!(
        "{}@{}/{}",
        snapshot.project, snapshot.version_label, snapshot.granularity
    )
}

/// Indexes the requested fields of every document in the snapshot.
pub fn build_index(snapshot: &Snapshot, fields: &[DocField]) -> Result<Index, IrError> {
    if snapshot.is_empty() {
        return Err(IrError::EmptyCorpus);
    }
    let fields: BTreeSet<DocField> = fields.iter().copied().collect();
    let indexed = fields
        .iter()
        .map(|&field| {
            let streams: Vec<TokenStream> = snapshot
                .docs()
                .par_iter()
                .map(|doc| tokenize(doc.field_text(field)))
                .collect();
            (field, FieldIndex::build(&streams))
        })
        .collect();
    Ok(Index {
        key: IndexKey {
            snapshot_id: snapshot_id(snapshot),
            tokenizer_version: TOKENIZER_VERSION.to_string(),
            fields: fields.into_iter().collect(),
        },
        doc_ids: snapshot.docs().iter().map(|d| d.id.clone()).collect(),
        fields: indexed,
    })
}

/// The two query fields used by structured retrieval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StructuredQuery {
    pub summary: TokenStream,
    pub description: TokenStream,
}

impl Index {
    pub fn key(&self) -> &IndexKey {
        &self.key
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn position(&self, doc_id: &str) -> Result<usize, IrError> {
        self.doc_ids
            .binary_search_by(|d| d.as_str().cmp(doc_id))
            .map_err(|_| IrError::UnknownDoc(doc_id.to_string()))
    }

    pub fn field(&self, field: DocField) -> Result<&FieldIndex, IrError> {
        self.fields.get(&field).ok_or(IrError::FieldNotIndexed(field))
    }

    /// Cosine between the query and one document in `field`, in `[0, 1]`.
    pub fn cosine_similarity(&self, query: &TokenStream, doc_id: &str, field: DocField) -> Result<f64, IrError> {
        let pos = self.position(doc_id)?;
        let fi = self.field(field)?;
        Ok(fi.cosine(&fi.query_vector(query), pos))
    }

    /// Cosine of the query against every document, in `doc_ids` order.
    pub fn cosine_all(&self, query: &TokenStream, field: DocField) -> Result<Vec<f64>, IrError> {
        let fi = self.field(field)?;
        let qv = fi.query_vector(query);
        Ok((0..self.len()).map(|d| fi.cosine(&qv, d)).collect())
    }

    /// Logistic length boost `1 / (1 + e^-n)` with `n` the min-max normalized
    /// term count of the document's content (0 when all sizes are equal).
    pub fn length_boosts(&self) -> Result<Vec<f64>, IrError> {
        let fi = self.field(DocField::Content)?;
        let min = fi.term_counts.iter().copied().min().unwrap_or(0);
        let max = fi.term_counts.iter().copied().max().unwrap_or(0);
        Ok(fi
            .term_counts
            .iter()
            .map(|&len| {
                let n = if max == min {
                    0.0
                } else {
                    (len - min) as f64 / (max - min) as f64
                };
                1.0 / (1.0 + (-n).exp())
            })
            .collect())
    }

    /// rVSM: length boost times content cosine.
    pub fn rvsm_score(&self, query: &TokenStream, doc_id: &str) -> Result<f64, IrError> {
        let pos = self.position(doc_id)?;
        let boost = self.length_boosts()?[pos];
        Ok(boost * self.cosine_similarity(query, doc_id, DocField::Content)?)
    }

    pub fn rvsm_all(&self, query: &TokenStream) -> Result<Vec<f64>, IrError> {
        let boosts = self.length_boosts()?;
        let cosines = self.cosine_all(query, DocField::Content)?;
        Ok(boosts.iter().zip(cosines).map(|(g, c)| g * c).collect())
    }

    /// Sum of the eight (query field x structural doc field) cosines.
    pub fn structured_similarity(&self, query: &StructuredQuery, doc_id: &str) -> Result<f64, IrError> {
        let pos = self.position(doc_id)?;
        let mut sum = 0.0;
        for q in [&query.summary, &query.description] {
            for field in DocField::STRUCTURAL {
                let fi = self.field(field)?;
                sum += fi.cosine(&fi.query_vector(q), pos);
            }
        }
        Ok(sum)
    }

    pub fn structured_all(&self, query: &StructuredQuery) -> Result<Vec<f64>, IrError> {
        let mut totals = vec![0.0; self.len()];
        for q in [&query.summary, &query.description] {
            for field in DocField::STRUCTURAL {
                for (total, c) in totals.iter_mut().zip(self.cosine_all(q, field)?) {
                    *total += c;
                }
            }
        }
        Ok(totals)
    }

    pub fn save<W: Write>(&self, writer: W) -> Result<(), IrError> {
        serde_json::to_writer(writer, self).map_err(|e| IrError::Cache(e.to_string()))
    }

    /// Loads a cached index, refusing one built for a different key.
    pub fn load<R: Read>(reader: R, expected: &IndexKey) -> Result<Self, IrError> {
        let index: Index =
            serde_json::from_reader(reader).map_err(|e| IrError::Cache(e.to_string()))?;
        if &index.key != expected {
            return Err(IrError::Cache(format!(
                "cache key mismatch: found {:?}, expected {:?}",
                index.key, expected
            )));
        }
        Ok(index)
    }
}

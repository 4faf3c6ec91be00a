//! Joint vocabulary and the boolean-tf × smoothed-idf document matrix.
//!
//! For a corpus of `N` documents, gram `k` appearing in `D(k)` of them gets
//! weight `1 + ln((N + 1) / (D(k) + 1))` in every document that contains it
//! and no entry elsewhere. Rows are documents, columns are grams.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::Serialize;

use crate::corpus::NGramStream;
use crate::error::{Error, Result};

/// Sparse vector with strictly increasing indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SparseVector {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Builds from (index, value) pairs in any order. Zero values are
    /// dropped; repeated indices are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, v) in pairs {
            *acc.entry(i).or_default() += v;
        }
        let (indices, values) = acc.into_iter().filter(|&(_, v)| v != 0.0).unzip();
        SparseVector { indices, values }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<f64> {
        self.indices.binary_search(&index).ok().map(|p| self.values[p])
    }

    /// Merge-join dot product, summed in index order.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    grams: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    fn from_sorted(grams: Vec<String>) -> Self {
        let index = grams.iter().enumerate().map(|(i, g)| (g.clone(), i)).collect();
        Vocabulary { grams, index }
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.is_empty()
    }

    pub fn grams(&self) -> &[String] {
        &self.grams
    }

    pub fn gram(&self, column: usize) -> &str {
        &self.grams[column]
    }

    pub fn column(&self, gram: &str) -> Option<usize> {
        self.index.get(gram).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfMatrix {
    vocabulary: Vocabulary,
    doc_ids: Vec<String>,
    rows: Vec<SparseVector>,
    doc_freq: Vec<usize>,
    idf: Vec<f64>,
    row_index: HashMap<String, usize>,
}

/// Smoothed inverse document frequency.
pub fn idf(n_docs: usize, doc_freq: usize) -> f64 {
    1.0 + ((n_docs + 1) as f64 / (doc_freq + 1) as f64).ln()
}

/// Fits the vocabulary and weights in one pass with no document-frequency
/// pruning.
pub fn fit_transform(streams: &[NGramStream]) -> Result<TfIdfMatrix> {
    fit_transform_with_min_df(streams, 1)
}

/// Like [`fit_transform`], but drops grams that occur in fewer than
/// `min_df` documents. `N` still counts every document.
pub fn fit_transform_with_min_df(streams: &[NGramStream], min_df: usize) -> Result<TfIdfMatrix> {
    let n = streams.len();
    if n < 2 {
        return Err(Error::TooFewDocuments(n));
    }
    if streams.iter().all(|s| s.grams.is_empty()) {
        return Err(Error::EmptyCorpus);
    }

    let distinct: Vec<BTreeSet<&str>> = streams
        .iter()
        .map(|s| s.grams.iter().map(String::as_str).collect())
        .collect();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for set in &distinct {
        for g in set {
            *df.entry(g).or_default() += 1;
        }
    }
    df.retain(|_, d| *d >= min_df.max(1));
    if df.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let grams: Vec<String> = df.keys().map(|g| g.to_string()).collect();
    let doc_freq: Vec<usize> = df.values().copied().collect();
    let idf: Vec<f64> = doc_freq.iter().map(|&d| idf(n, d)).collect();
    let vocabulary = Vocabulary::from_sorted(grams);

    // BTreeSet iteration is sorted, matching the vocabulary order, so the
    // column ids come out increasing.
    let rows = distinct
        .iter()
        .map(|set| {
            let indices: Vec<usize> = set.iter().filter_map(|g| vocabulary.column(g)).collect();
            let values = indices.iter().map(|&k| idf[k]).collect();
            SparseVector { indices, values }
        })
        .collect();

    let doc_ids: Vec<String> = streams.iter().map(|s| s.doc_id.clone()).collect();
    let row_index = doc_ids.iter().enumerate().map(|(i, d)| (d.clone(), i)).collect();
    Ok(TfIdfMatrix {
        vocabulary,
        doc_ids,
        rows,
        doc_freq,
        idf,
        row_index,
    })
}

impl TfIdfMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn doc_freq(&self) -> &[usize] {
        &self.doc_freq
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVector::nnz).sum()
    }

    pub fn row_position(&self, doc_id: &str) -> Option<usize> {
        self.row_index.get(doc_id).copied()
    }

    pub fn row(&self, doc_id: &str) -> Result<&SparseVector> {
        self.row_position(doc_id)
            .map(|i| &self.rows[i])
            .ok_or_else(|| Error::UnknownDocument(doc_id.to_owned()))
    }

    /// `doc_id,gram,weight` triples, one per stored entry.
    pub fn write_triples<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["doc_id", "gram", "weight"])?;
        for (id, row) in self.doc_ids.iter().zip(&self.rows) {
            for (k, v) in row.iter() {
                w.write_record([id.as_str(), self.vocabulary.gram(k), &v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// `column,gram,doc_freq,idf`, one row per vocabulary entry.
    pub fn write_vocabulary<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["column", "gram", "doc_freq", "idf"])?;
        for (k, gram) in self.vocabulary.grams().iter().enumerate() {
            w.write_record([
                k.to_string(),
                gram.clone(),
                self.doc_freq[k].to_string(),
                self.idf[k].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

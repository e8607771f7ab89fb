//! Vocabulary construction with document-frequency pruning, and sparse
//! document vectors (TF-IDF, raw counts, or presence bits).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::textproc::{Fnv64, TokenStream};

pub const DEFAULT_MIN_DF: f64 = 0.0005;
pub const DEFAULT_MAX_DF: f64 = 0.70;

/// Token → feature index, with the document frequencies it was built from.
/// Indices follow lexicographic token order.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    df: Vec<usize>,
    n_documents: usize,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from stored parts (e.g. a model file). Tokens
    /// must be strictly increasing and every df within `1..=n_documents`.
    pub fn from_parts(tokens: Vec<String>, df: Vec<usize>, n_documents: usize) -> Result<Self> {
        if tokens.len() != df.len() {
            return Err(Error::contract("token and df lists differ in length"));
        }
        if tokens.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("vocabulary tokens must be sorted and unique"));
        }
        if df.iter().any(|&d| d == 0 || d > n_documents) {
            return Err(Error::contract("document frequency out of range"));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocabulary {
            tokens,
            index,
            df,
            n_documents,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, index: usize) -> &str {
        &self.tokens[index]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn document_frequency(&self, index: usize) -> usize {
        self.df[index]
    }

    pub fn document_frequencies(&self) -> &[usize] {
        &self.df
    }

    /// Content identifier binding matrices and models to this vocabulary.
    pub fn id(&self) -> u64 {
        let mut h = Fnv64::new();
        h.write(&(self.n_documents as u64).to_le_bytes());
        for (t, d) in self.tokens.iter().zip(&self.df) {
            h.write(t.as_bytes());
            h.write(&[0]);
            h.write(&(*d as u64).to_le_bytes());
        }
        h.finish()
    }

    /// Keeps only the given feature indices (any order, duplicates ignored).
    /// Indices are reassigned densely, preserving token order.
    pub fn restrict(&self, keep: &[usize]) -> Vocabulary {
        let keep: BTreeSet<usize> = keep.iter().copied().collect();
        let tokens: Vec<String> = keep.iter().map(|&i| self.tokens[i].clone()).collect();
        let df = keep.iter().map(|&i| self.df[i]).collect();
        Vocabulary::from_parts(tokens, df, self.n_documents)
            .expect("subset of a valid vocabulary is valid")
    }

    /// Writes `token TAB index TAB df` lines.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (i, (t, d)) in self.tokens.iter().zip(&self.df).enumerate() {
            writeln!(w, "{t}\t{i}\t{d}")?;
        }
        w.flush()
    }
}

/// Builds a vocabulary over `docs`, keeping tokens whose document-frequency
/// ratio lies in `[min_df, max_df]` (inclusive on both ends).
pub fn build_vocabulary<'a, I>(docs: I, min_df: f64, max_df: f64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a TokenStream>,
{
    if !(0.0..=1.0).contains(&min_df) || !(0.0..=1.0).contains(&max_df) || min_df >= max_df {
        return Err(Error::contract(format!(
            "need 0 <= min_df < max_df <= 1, got min_df={min_df} max_df={max_df}"
        )));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    let mut n = 0usize;
    for doc in docs {
        n += 1;
        let distinct: BTreeSet<&str> = doc.iter().collect();
        for t in distinct {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if n == 0 {
        return Err(Error::DegenerateCorpus("no documents to build a vocabulary from".into()));
    }
    let raw = df.len();
    let (tokens, dfs): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, d)| {
            let ratio = d as f64 / n as f64;
            min_df <= ratio && ratio <= max_df
        })
        .map(|(t, d)| (t.to_string(), d))
        .unzip();
    if tokens.is_empty() {
        return Err(Error::DegenerateFeatures(format!(
            "all {raw} tokens pruned by df thresholds [{min_df}, {max_df}] over {n} documents"
        )));
    }
    Vocabulary::from_parts(tokens, dfs, n)
}

/// `tf * ln(n_documents / df)`.
///
/// Panics if `df` is zero or exceeds `n_documents`; vocabulary-built tokens
/// always satisfy `1 <= df <= n_documents`.
pub fn tfidf_weight(tf: u32, df: usize, n_documents: usize) -> f64 {
    assert!(
        df >= 1 && df <= n_documents,
        "tfidf_weight: df={df} outside 1..={n_documents}"
    );
    f64::from(tf) * (n_documents as f64 / df as f64).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    TfIdf,
    /// Raw term counts.
    Count,
    /// 1 for every present token.
    Binary,
}

impl WeightMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WeightMode::TfIdf => "tfidf",
            WeightMode::Count => "count",
            WeightMode::Binary => "binary",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tfidf" => Some(WeightMode::TfIdf),
            "count" => Some(WeightMode::Count),
            "binary" => Some(WeightMode::Binary),
            _ => None,
        }
    }
}

/// Sparse row: `(feature index, weight)` with strictly increasing indices.
/// Zero weights are not stored.
pub type SparseRow = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    pub rows: Vec<SparseRow>,
    pub mode: WeightMode,
    pub n_features: usize,
    pub vocab_id: u64,
}

impl DocTermMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// New matrix holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> DocTermMatrix {
        DocTermMatrix {
            rows: rows.iter().map(|&r| self.rows[r].clone()).collect(),
            ..self.clone_header()
        }
    }

    /// Keeps only `keep` columns (sorted, unique), renumbering them densely.
    pub fn select_columns(&self, keep: &[usize], vocab_id: u64) -> DocTermMatrix {
        let mut remap = vec![usize::MAX; self.n_features];
        for (new, &old) in keep.iter().enumerate() {
            remap[old] = new;
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .filter(|(i, _)| remap[*i] != usize::MAX)
                    .map(|&(i, w)| (remap[i], w))
                    .collect()
            })
            .collect();
        DocTermMatrix {
            rows,
            mode: self.mode,
            n_features: keep.len(),
            vocab_id,
        }
    }

    fn clone_header(&self) -> DocTermMatrix {
        DocTermMatrix {
            rows: Vec::new(),
            mode: self.mode,
            n_features: self.n_features,
            vocab_id: self.vocab_id,
        }
    }

    /// Writes `doc_id TAB feature_index TAB weight` triplets.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (doc, row) in self.rows.iter().enumerate() {
            for (i, v) in row {
                writeln!(w, "{doc}\t{i}\t{v:?}")?;
            }
        }
        w.flush()
    }
}

/// Vectorizes one token stream. Out-of-vocabulary tokens are ignored.
pub fn vectorize_one(doc: &TokenStream, vocab: &Vocabulary, mode: WeightMode) -> SparseRow {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for t in doc.iter() {
        if let Some(i) = vocab.index_of(t) {
            *counts.entry(i).or_insert(0) += 1;
        }
    }
    counts
        .into_iter()
        .map(|(i, tf)| {
            let w = match mode {
                WeightMode::TfIdf => tfidf_weight(tf, vocab.df[i], vocab.n_documents),
                WeightMode::Count => f64::from(tf),
                WeightMode::Binary => 1.0,
            };
            (i, w)
        })
        .filter(|&(_, w)| w != 0.0)
        .collect()
}

pub fn vectorize(docs: &[TokenStream], vocab: &Vocabulary, mode: WeightMode) -> DocTermMatrix {
    vectorize_refs(&docs.iter().collect::<Vec<_>>(), vocab, mode)
}

pub fn vectorize_refs(docs: &[&TokenStream], vocab: &Vocabulary, mode: WeightMode) -> DocTermMatrix {
    let rows = docs
        .par_iter()
        .map(|d| vectorize_one(d, vocab, mode))
        .collect();
    DocTermMatrix {
        rows,
        mode,
        n_features: vocab.len(),
        vocab_id: vocab.id(),
    }
}

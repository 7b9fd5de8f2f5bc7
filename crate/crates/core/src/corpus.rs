//! Labeled document collections and BM25-style term-frequency features.
//!
//! Input is JSONL, one document per line, either raw text
//! (`{"id": .., "text": .., "labels": [..]}`) or pre-tokenized
//! (`{"id": .., "tokens": [..], "labels": [..]}`). Feature indices are assigned
//! in lexicographic term order, so the vocabulary only depends on the set of terms.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Splits on any non-alphanumeric character, lowercases, and drops tokens
/// shorter than two characters.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|tok| tok.chars().count() >= 2)
        .map(str::to_lowercase)
        .collect()
}

/// Saturating term-frequency component of BM25: `tf / (tf + k1 (1 - b + b dl/avdl))`.
pub fn bm25_tf_weight(tf: u32, dl: usize, avdl: f64, k1: f64, b: f64) -> Result<f64> {
    if !(avdl > 0.0 && avdl.is_finite()) {
        return Err(Error::domain(format!("average document length must be positive, got {avdl}")));
    }
    if !(k1 > 0.0 && k1.is_finite()) {
        return Err(Error::domain(format!("k1 must be positive, got {k1}")));
    }
    if !(0.0..=1.0).contains(&b) {
        return Err(Error::domain(format!("b must lie in [0, 1], got {b}")));
    }
    Ok(tf_weight(tf, dl, avdl, k1, b))
}

#[inline]
fn tf_weight(tf: u32, dl: usize, avdl: f64, k1: f64, b: f64) -> f64 {
    if tf == 0 {
        return 0.0;
    }
    let tf = f64::from(tf);
    tf / (tf + k1 * (1.0 - b + b * dl as f64 / avdl))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Bm25Params { k1: 1.2, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<()> {
        bm25_tf_weight(1, 1, 1.0, self.k1, self.b).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, tokens: Vec<String>) -> Self {
        Document { id: id.into(), tokens }
    }

    pub fn from_text(id: impl Into<String>, text: &str) -> Self {
        Document::new(id, tokenize(text))
    }

    /// Number of token occurrences (`dl` in BM25).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Sparse feature vector; entries are sorted by index and never zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    /// Builds a vector from arbitrary `(index, weight)` pairs. Zero weights are
    /// dropped and duplicate indices are summed.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
        for (idx, w) in pairs {
            *acc.entry(idx).or_insert(0.0) += w;
        }
        FeatureVector {
            entries: acc.into_iter().filter(|&(_, w)| w != 0.0).collect(),
        }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, idx: u32) -> f64 {
        self.entries
            .binary_search_by_key(&idx, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|&(i, _)| i)
    }

    /// Dot product with a dense vector. Indices past the end contribute nothing.
    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .filter_map(|&(i, w)| dense.get(i as usize).map(|d| d * w))
            .sum()
    }

    pub fn add_to_dense(&self, dense: &mut [f64], scale: f64) {
        for &(i, w) in &self.entries {
            dense[i as usize] += scale * w;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    categories: BTreeMap<String, BTreeSet<String>>,
    vocabulary: BTreeMap<String, usize>,
    avg_doc_length: f64,
    index_by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Validates ids and label references, then builds the vocabulary and `avdl`.
    pub fn new(
        documents: Vec<Document>,
        categories: BTreeMap<String, BTreeSet<String>>,
    ) -> Result<Self> {
        let mut index_by_id = HashMap::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            if index_by_id.insert(doc.id.clone(), i).is_some() {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        for (name, ids) in &categories {
            if let Some(missing) = ids.iter().find(|id| !index_by_id.contains_key(*id)) {
                return Err(Error::domain(format!(
                    "category `{name}` references unknown document `{missing}`"
                )));
            }
        }

        let terms: BTreeSet<&str> = documents
            .iter()
            .flat_map(|d| d.tokens.iter().map(String::as_str))
            .collect();
        let vocabulary = terms
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), i))
            .collect();

        let total: usize = documents.iter().map(Document::len).sum();
        let avg_doc_length = if documents.is_empty() {
            0.0
        } else {
            total as f64 / documents.len() as f64
        };

        Ok(Corpus {
            documents,
            categories,
            vocabulary,
            avg_doc_length,
            index_by_id,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn categories(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.categories
    }

    pub fn positives(&self, category: &str) -> Option<&BTreeSet<String>> {
        self.categories.get(category)
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    /// Collection size `N`.
    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.index_by_id.get(id).copied()
    }

    /// Per-document membership flags for `category`, in document order.
    pub fn label_mask(&self, category: &str) -> Option<Vec<bool>> {
        let ids = self.categories.get(category)?;
        Some(self.documents.iter().map(|d| ids.contains(&d.id)).collect())
    }

    /// Labels per document, in document order, as stored in JSONL.
    fn labels_of(&self) -> Vec<Vec<&str>> {
        let mut labels = vec![Vec::new(); self.documents.len()];
        for (name, ids) in &self.categories {
            for id in ids {
                labels[self.index_by_id[id]].push(name.as_str());
            }
        }
        labels
    }

    /// Weights every distinct in-vocabulary term of `doc`; unknown terms are skipped.
    pub fn vectorize(&self, doc: &Document, params: Bm25Params) -> FeatureVector {
        let mut tf: BTreeMap<u32, u32> = BTreeMap::new();
        for tok in &doc.tokens {
            if let Some(&idx) = self.vocabulary.get(tok) {
                *tf.entry(idx as u32).or_insert(0) += 1;
            }
        }
        if tf.is_empty() {
            return FeatureVector::default();
        }
        // A known term implies some non-empty document, hence avdl > 0.
        let entries = tf
            .into_iter()
            .map(|(idx, count)| {
                let w = tf_weight(count, doc.len(), self.avg_doc_length, params.k1, params.b);
                (idx, w)
            })
            .filter(|&(_, w)| w != 0.0)
            .collect();
        FeatureVector { entries }
    }

    pub fn vectorize_all(&self, params: Bm25Params) -> Vec<FeatureVector> {
        self.documents.iter().map(|d| self.vectorize(d, params)).collect()
    }

    /// Keeps `floor(fraction * N)` documents chosen by a seeded sampler, in
    /// their original order. Vocabulary and `avdl` are recomputed.
    pub fn subsample(&self, fraction: f64, rng_seed: u64) -> Result<Corpus> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::domain(format!("fraction must lie in (0, 1], got {fraction}")));
        }
        let n = self.documents.len();
        let keep = (fraction * n as f64).floor() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut chosen = rand::seq::index::sample(&mut rng, n, keep).into_vec();
        chosen.sort_unstable();

        let documents: Vec<Document> = chosen.iter().map(|&i| self.documents[i].clone()).collect();
        let kept: BTreeSet<&str> = documents.iter().map(|d| d.id.as_str()).collect();
        let categories = self
            .categories
            .iter()
            .map(|(name, ids)| {
                let ids = ids.iter().filter(|id| kept.contains(id.as_str())).cloned().collect();
                (name.clone(), ids)
            })
            .collect();
        Corpus::new(documents, categories)
    }

    /// Writes the pre-tokenized JSONL form accepted by [`parse_jsonl`].
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for (doc, labels) in self.documents.iter().zip(self.labels_of()) {
            let rec = TokenRecordRef {
                id: &doc.id,
                tokens: &doc.tokens,
                labels,
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Serializes the full corpus, including categories with no positives.
    pub fn write_cache<W: Write>(&self, out: W) -> Result<()> {
        let cache = CacheRef {
            categories: &self.categories,
            documents: self
                .documents
                .iter()
                .map(|d| CachedDoc { id: &d.id, tokens: &d.tokens })
                .collect(),
        };
        serde_json::to_writer(out, &cache)?;
        Ok(())
    }

    pub fn read_cache<R: std::io::Read>(input: R) -> Result<Corpus> {
        let cache: CacheOwned = serde_json::from_reader(input)?;
        let docs = cache
            .documents
            .into_iter()
            .map(|d| Document::new(d.id, d.tokens))
            .collect();
        Corpus::new(docs, cache.categories)
    }

    pub fn save_cache(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(File::create(path)?);
        self.write_cache(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load_cache(path: impl AsRef<Path>) -> Result<Corpus> {
        Corpus::read_cache(BufReader::new(File::open(path)?))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    id: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    tokens: Option<Vec<String>>,
    #[serde(default)]
    labels: Vec<String>,
}

#[derive(Serialize)]
struct TokenRecordRef<'a> {
    id: &'a str,
    tokens: &'a [String],
    labels: Vec<&'a str>,
}

#[derive(Serialize)]
struct CachedDoc<'a> {
    id: &'a str,
    tokens: &'a [String],
}

#[derive(Serialize)]
struct CacheRef<'a> {
    categories: &'a BTreeMap<String, BTreeSet<String>>,
    documents: Vec<CachedDoc<'a>>,
}

#[derive(Deserialize)]
struct CachedDocOwned {
    id: String,
    tokens: Vec<String>,
}

#[derive(Deserialize)]
struct CacheOwned {
    categories: BTreeMap<String, BTreeSet<String>>,
    documents: Vec<CachedDocOwned>,
}

/// Parses JSONL corpus records. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_jsonl<R: BufRead>(input: R) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut categories: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut seen = BTreeSet::new();

    for (lineno, line) in input.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let tokens = match (rec.text, rec.tokens) {
            (Some(text), None) => tokenize(&text),
            (None, Some(tokens)) => tokens,
            (Some(_), Some(_)) => {
                return Err(Error::Parse {
                    line: lineno,
                    message: "record has both `text` and `tokens`".into(),
                })
            }
            (None, None) => {
                return Err(Error::Parse {
                    line: lineno,
                    message: "record needs `text` or `tokens`".into(),
                })
            }
        };
        if !seen.insert(rec.id.clone()) {
            return Err(Error::DuplicateId(rec.id));
        }
        for label in rec.labels {
            categories.entry(label).or_default().insert(rec.id.clone());
        }
        documents.push(Document::new(rec.id, tokens));
    }
    Corpus::new(documents, categories)
}

pub fn ingest_jsonl(path: impl AsRef<Path>) -> Result<Corpus> {
    parse_jsonl(BufReader::new(File::open(path)?))
}

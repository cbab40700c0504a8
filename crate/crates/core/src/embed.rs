//! Word-embedding store with cosine similarity over predicate symbols.
//!
//! Vectors are unit-normalized at load and kept as `f32`; dot products are
//! accumulated in `f64`. Symbols map to embedding keys by splitting camelCase
//! (`hasA` -> `has_a`). A key that is absent but contains underscores falls
//! back to the normalized mean of its component words that are present.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use thiserror::Error;

use crate::logic::{Symbol, SymbolSet};

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("embedding file is empty")]
    Empty,
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no vector for symbol `{0}`")]
    UnknownSymbol(String),
    #[error("{path}: {source}")]
    Open { path: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    pub zero_vectors: usize,
    /// Keys for ConceptNet languages other than English.
    pub foreign: usize,
    /// Repeated keys; the first occurrence wins.
    pub duplicates: usize,
    pub header: Option<(usize, usize)>,
}

impl LoadReport {
    pub fn rejected(&self) -> usize {
        self.zero_vectors + self.foreign + self.duplicates
    }
}

#[derive(Clone, Debug)]
pub struct EmbeddingStore {
    dimension: usize,
    keys: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

/// Embedding key for a symbol or raw vocabulary entry: ConceptNet prefix
/// stripped, camelCase split with underscores, lowercased.
pub fn embedding_key(s: &str) -> String {
    let s = s.trim();
    let s = s.strip_prefix("/c/en/").map(|r| r.split('/').next().unwrap_or("")).unwrap_or(s);
    let mut out = String::with_capacity(s.len() + 2);
    let mut prev_lower = false;
    for c in s.chars() {
        if c.is_whitespace() {
            out.push('_');
            prev_lower = false;
        } else if c.is_uppercase() {
            if prev_lower {
                out.push('_');
            }
            out.extend(c.to_lowercase());
            prev_lower = false;
        } else {
            out.push(c);
            prev_lower = c.is_lowercase() || c.is_ascii_digit();
        }
    }
    out
}

fn normalize(v: &mut [f64]) -> bool {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= n);
    true
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum()
}

/// Cosine of two unit vectors, clamped to [-1, 1].
pub fn cosine_unit(a: &[f32], b: &[f32]) -> f64 {
    dot(a, b).clamp(-1.0, 1.0)
}

impl EmbeddingStore {
    /// Builds a store from in-memory vectors. Zero vectors are skipped.
    pub fn from_vectors<I, S>(dimension: usize, vectors: I) -> Result<(Self, LoadReport), EmbedError>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: AsRef<str>,
    {
        let mut store = EmbeddingStore { dimension, keys: Vec::new(), index: HashMap::new(), data: Vec::new() };
        let mut report = LoadReport::default();
        for (i, (k, v)) in vectors.into_iter().enumerate() {
            if v.len() != dimension {
                return Err(EmbedError::DimensionMismatch { line: i + 1, expected: dimension, found: v.len() });
            }
            store.insert(k.as_ref(), v, &mut report);
        }
        if store.keys.is_empty() && report.rejected() == 0 {
            return Err(EmbedError::Empty);
        }
        Ok((store, report))
    }

    fn insert(&mut self, raw: &str, mut v: Vec<f64>, report: &mut LoadReport) {
        if raw.starts_with("/c/") && !raw.starts_with("/c/en/") {
            report.foreign += 1;
            return;
        }
        if !normalize(&mut v) {
            report.zero_vectors += 1;
            return;
        }
        let key = embedding_key(raw);
        if self.index.contains_key(&key) {
            report.duplicates += 1;
            return;
        }
        self.index.insert(key.clone(), self.keys.len());
        self.keys.push(key);
        self.data.extend(v.iter().map(|x| *x as f32));
        report.loaded += 1;
    }

    /// Parses word2vec-style text: `word c1 .. cd` per line, with an optional
    /// `count dim` header line.
    pub fn from_reader<R: BufRead>(source: R) -> Result<(Self, LoadReport), EmbedError> {
        let mut store: Option<EmbeddingStore> = None;
        let mut report = LoadReport::default();
        let mut first = true;
        for (n, line) in source.lines().enumerate() {
            let line = line?;
            let line_no = n + 1;
            let mut fields = line.split_whitespace();
            let Some(word) = fields.next() else { continue };
            let rest: Vec<&str> = fields.collect();
            if first {
                first = false;
                if let [dim] = rest.as_slice() {
                    if let (Ok(count), Ok(dim)) = (word.parse::<usize>(), dim.parse::<usize>()) {
                        if dim == 0 {
                            return Err(EmbedError::Parse { line: line_no, message: "header dimension is 0".into() });
                        }
                        report.header = Some((count, dim));
                        store = Some(EmbeddingStore::with_dimension(dim));
                        continue;
                    }
                }
            }
            let s = store.get_or_insert_with(|| EmbeddingStore::with_dimension(rest.len()));
            if rest.len() != s.dimension || rest.is_empty() {
                return Err(EmbedError::DimensionMismatch { line: line_no, expected: s.dimension, found: rest.len() });
            }
            let v = rest
                .iter()
                .map(|x| x.parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| EmbedError::Parse { line: line_no, message: format!("bad component: {e}") })?;
            s.insert(word, v, &mut report);
        }
        match store {
            Some(s) if !s.keys.is_empty() || report.rejected() > 0 => Ok((s, report)),
            _ => Err(EmbedError::Empty),
        }
    }

    fn with_dimension(dimension: usize) -> Self {
        EmbeddingStore { dimension, keys: Vec::new(), index: HashMap::new(), data: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Vocabulary keys in load order.
    pub fn keys(&self) -> impl Iterator<Item = &str> + '_ {
        self.keys.iter().map(String::as_str)
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// Exact-key vector, without fallback.
    pub fn vector(&self, s: &str) -> Option<&[f32]> {
        self.index.get(&embedding_key(s)).map(|&i| self.row(i))
    }

    /// Vector for `s`, falling back to the normalized mean of the
    /// underscore-separated components that are present.
    pub fn lookup_vector(&self, s: &str) -> Option<Cow<'_, [f32]>> {
        let key = embedding_key(s);
        if let Some(&i) = self.index.get(&key) {
            return Some(Cow::Borrowed(self.row(i)));
        }
        if !key.contains('_') {
            return None;
        }
        let mut acc = vec![0.0f64; self.dimension];
        let mut found = false;
        for part in key.split('_').filter(|p| !p.is_empty()) {
            if let Some(&i) = self.index.get(part) {
                found = true;
                acc.iter_mut().zip(self.row(i)).for_each(|(a, x)| *a += f64::from(*x));
            }
        }
        (found && normalize(&mut acc)).then(|| Cow::Owned(acc.into_iter().map(|x| x as f32).collect()))
    }

    pub fn has_vector(&self, s: &str) -> bool {
        self.lookup_vector(s).is_some()
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64, EmbedError> {
        let va = self.lookup_vector(a).ok_or_else(|| EmbedError::UnknownSymbol(a.to_string()))?;
        let vb = self.lookup_vector(b).ok_or_else(|| EmbedError::UnknownSymbol(b.to_string()))?;
        Ok(cosine_unit(&va, &vb))
    }

    /// Symbols with cosine to `s` of at least `threshold`, by similarity
    /// descending then name. Candidates are `restrict_to` when given,
    /// otherwise the whole vocabulary.
    pub fn similar_symbols(
        &self,
        s: &str,
        threshold: f64,
        restrict_to: Option<&SymbolSet>,
        exclude_self: bool,
    ) -> Result<Vec<(Symbol, f64)>, EmbedError> {
        let v = self.lookup_vector(s).ok_or_else(|| EmbedError::UnknownSymbol(s.to_string()))?;
        let own_key = embedding_key(s);
        let mut out: Vec<(Symbol, f64)> = Vec::new();
        let mut consider = |name: &str, w: &[f32]| {
            if exclude_self && embedding_key(name) == own_key {
                return;
            }
            let c = cosine_unit(&v, w);
            if c >= threshold {
                out.push((Symbol::new(name), c));
            }
        };
        match restrict_to {
            Some(set) => {
                for sym in set.iter() {
                    if let Some(w) = self.lookup_vector(sym.as_str()) {
                        consider(sym.as_str(), &w);
                    }
                }
            }
            None => {
                for (i, k) in self.keys.iter().enumerate() {
                    consider(k, self.row(i));
                }
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(out)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<(EmbeddingStore, LoadReport), EmbedError> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|source| EmbedError::Open { path: path.display().to_string(), source })?;
    EmbeddingStore::from_reader(std::io::BufReader::new(file))
}

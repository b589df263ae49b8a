//! Pretrained word embeddings: loading, lookup and the text file format.
//!
//! The file format is the plain word2vec-style text layout: a header line
//! `|V| d`, followed by one line per word holding the token and `d`
//! space-separated decimals. Words are expected in descending frequency
//! order, which [`crate::corpus::ExclusionList`] relies on.
//!
//! Two sentinel rows are appended after loading: `UNK` (the mean of all
//! loaded vectors) and `PAD` (all zeros).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Token that always resolves to the padding row. Used for window
/// positions that fall outside a sentence.
pub const BOUNDARY_TOKEN: &str = "<PAD>";

/// How `lookup` falls back when a word is not found verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CaseFallback {
    /// Try the lowercased form before resorting to `UNK`.
    #[default]
    Lowercase,
    /// Exact match or `UNK`.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    // row-major, (|V| + 2) x dim
    vectors: Vec<f64>,
    fallback: CaseFallback,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs in frequency order.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut table = EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            vectors: Vec::new(),
            fallback: CaseFallback::default(),
        };
        for (i, (word, vec)) in rows.into_iter().enumerate() {
            table.push(word.into(), &vec).map_err(|e| match e {
                Error::Invalid(msg) => Error::parse("<rows>", i + 1, msg),
                other => other,
            })?;
        }
        table.finish();
        Ok(table)
    }

    fn push(&mut self, word: String, vec: &[f64]) -> Result<()> {
        if vec.len() != self.dim {
            return Err(Error::invalid(format!(
                "expected {} components, got {}",
                self.dim,
                vec.len()
            )));
        }
        if let Some(bad) = vec.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite component {bad}")));
        }
        if self.index.contains_key(&word) {
            return Err(Error::invalid(format!("duplicate word {word:?}")));
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend_from_slice(vec);
        Ok(())
    }

    // Appends UNK (vocabulary mean) and PAD (zeros).
    fn finish(&mut self) {
        let n = self.words.len();
        let mut mean = vec![0.0; self.dim];
        if n > 0 {
            for row in self.vectors.chunks_exact(self.dim) {
                for (m, v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= n as f64;
            }
        }
        self.vectors.extend_from_slice(&mean);
        self.vectors.extend(std::iter::repeat_n(0.0, self.dim));
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses the text format. `origin` names the source in error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header"))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let (count, dim) = match fields.as_slice() {
            [v, d] => {
                let v: usize = v
                    .parse()
                    .map_err(|_| Error::parse(origin, 1, format!("bad vocabulary size {v:?}")))?;
                let d: usize = d
                    .parse()
                    .map_err(|_| Error::parse(origin, 1, format!("bad dimension {d:?}")))?;
                (v, d)
            }
            _ => return Err(Error::parse(origin, 1, "header must be \"|V| d\"")),
        };
        if dim == 0 {
            return Err(Error::parse(origin, 1, "dimension must be positive"));
        }

        let mut table = EmbeddingTable {
            dim,
            words: Vec::with_capacity(count),
            index: HashMap::with_capacity(count),
            vectors: Vec::with_capacity((count + 2) * dim),
            fallback: CaseFallback::default(),
        };
        let mut vec = Vec::with_capacity(dim);
        for (i, line) in lines {
            let lineno = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(' ').filter(|p| !p.is_empty());
            let word = parts.next().unwrap_or_default();
            vec.clear();
            for p in parts {
                let v: f64 = p
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, format!("bad number {p:?}")))?;
                vec.push(v);
            }
            if vec.len() != dim {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("expected {} fields, got {}", dim + 1, vec.len() + 1),
                ));
            }
            table
                .push(word.to_string(), &vec)
                .map_err(|e| Error::parse(origin, lineno, e.to_string()))?;
        }
        if table.words.len() != count {
            return Err(Error::parse(
                origin,
                1,
                format!(
                    "header declares {count} words, file has {}",
                    table.words.len()
                ),
            ));
        }
        table.finish();
        Ok(table)
    }

    /// Serializes the vocabulary rows (not the sentinels) in the text format.
    /// Numbers use the shortest representation that parses back exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.words.len(), self.dim);
        for (word, row) in self.words.iter().zip(self.vectors.chunks_exact(self.dim)) {
            out.push_str(word);
            for v in row {
                let _ = write!(out, " {v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn with_fallback(mut self, fallback: CaseFallback) -> Self {
        self.fallback = fallback;
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of vocabulary words, excluding the sentinels.
    #[inline]
    pub fn len(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Vocabulary in file (frequency) order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    #[inline]
    pub fn unk_index(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn pad_index(&self) -> usize {
        self.words.len() + 1
    }

    #[inline]
    pub fn row(&self, index: usize) -> &[f64] {
        &self.vectors[index * self.dim..(index + 1) * self.dim]
    }

    pub fn unk(&self) -> &[f64] {
        self.row(self.unk_index())
    }

    pub fn pad(&self) -> &[f64] {
        self.row(self.pad_index())
    }

    /// Row index for a token: exact match, then (optionally) lowercase
    /// fold, then `UNK`. The boundary token maps to `PAD`.
    pub fn index_of(&self, word: &str) -> usize {
        if word == BOUNDARY_TOKEN {
            return self.pad_index();
        }
        if let Some(&i) = self.index.get(word) {
            return i;
        }
        if self.fallback == CaseFallback::Lowercase {
            let lower = word.to_lowercase();
            if lower != word {
                if let Some(&i) = self.index.get(&lower) {
                    return i;
                }
            }
        }
        self.unk_index()
    }

    pub fn lookup(&self, word: &str) -> &[f64] {
        self.row(self.index_of(word))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }
}

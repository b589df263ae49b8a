//! Window examples and label-ratio correction.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::LabeledCorpus;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::tag::Tag;

/// Target positive ratio used unless configured otherwise.
pub const DEFAULT_RHO: f64 = 0.5;
/// Default window half-width (a 5-token window).
pub const DEFAULT_WINDOW: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowExample {
    pub features: Vec<f64>,
    pub tag: Tag,
}

impl WindowExample {
    #[inline]
    pub fn is_positive(&self) -> bool {
        self.tag.is_entity()
    }
}

/// Writes the concatenated embeddings of tokens `i-n ..= i+n` into `out`.
/// Positions outside the sentence use the padding row.
pub fn window_features<S: AsRef<str>>(
    tokens: &[S],
    i: usize,
    n: usize,
    table: &EmbeddingTable,
    out: &mut Vec<f64>,
) {
    out.clear();
    let center = i as isize;
    for off in -(n as isize)..=(n as isize) {
        let j = center + off;
        let row = if j < 0 || j as usize >= tokens.len() {
            table.pad()
        } else {
            table.lookup(tokens[j as usize].as_ref())
        };
        out.extend_from_slice(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<WindowExample>,
    window: usize,
    dim: usize,
}

impl Dataset {
    pub fn new(examples: Vec<WindowExample>, window: usize, dim: usize) -> Result<Self> {
        let width = (2 * window + 1) * dim;
        if let Some(bad) = examples.iter().find(|e| e.features.len() != width) {
            return Err(Error::Shape {
                expected: width,
                got: bad.features.len(),
            });
        }
        Ok(Dataset {
            examples,
            window,
            dim,
        })
    }

    /// One example per token of `labeled`, in corpus order.
    pub fn build(labeled: &LabeledCorpus, table: &EmbeddingTable, window: usize) -> Self {
        let mut examples = Vec::with_capacity(labeled.token_count());
        let mut buf = Vec::new();
        for (tokens, tags) in labeled.iter() {
            for (i, &tag) in tags.iter().enumerate() {
                window_features(tokens, i, window, table, &mut buf);
                examples.push(WindowExample {
                    features: buf.clone(),
                    tag,
                });
            }
        }
        Dataset {
            examples,
            window,
            dim: table.dim(),
        }
    }

    pub fn examples(&self) -> &[WindowExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_len(&self) -> usize {
        (2 * self.window + 1) * self.dim
    }

    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.is_positive()).count()
    }

    /// Fraction of positive examples; 0 for an empty dataset.
    pub fn rho(&self) -> f64 {
        if self.examples.is_empty() {
            0.0
        } else {
            self.positives() as f64 / self.examples.len() as f64
        }
    }

    pub fn tag_counts(&self) -> [usize; Tag::COUNT] {
        let mut c = [0; Tag::COUNT];
        for e in &self.examples {
            c[e.tag.index()] += 1;
        }
        c
    }

    /// Raises the positive ratio to `target_rho` by keeping every positive
    /// example and a seeded uniform sample (without replacement) of
    /// `⌊m⁺·(1−ρ)/ρ⌋` negatives. Kept examples retain their relative order.
    pub fn oversample(&self, target_rho: f64, seed: u64) -> Result<Dataset> {
        if !(target_rho > 0.0 && target_rho < 1.0) {
            return Err(Error::invalid(format!(
                "target ratio {target_rho} outside (0, 1)"
            )));
        }
        let (pos, neg): (Vec<usize>, Vec<usize>) =
            (0..self.examples.len()).partition(|&i| self.examples[i].is_positive());
        if pos.is_empty() {
            return Err(Error::invalid(
                "oversampling needs at least one positive example",
            ));
        }
        if neg.is_empty() {
            return Err(Error::invalid(
                "oversampling needs at least one negative example",
            ));
        }
        let current = self.rho();
        if target_rho < current - 1e-12 {
            return Err(Error::invalid(format!(
                "target ratio {target_rho} is below the current ratio {current}"
            )));
        }
        // slack for targets that hit an integer exactly
        let want = (pos.len() as f64 * (1.0 - target_rho) / target_rho + 1e-9).floor() as usize;
        let keep_neg = want.min(neg.len());

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut keep: Vec<usize> = sample(&mut rng, neg.len(), keep_neg)
            .into_iter()
            .map(|i| neg[i])
            .chain(pos.iter().copied())
            .collect();
        keep.sort_unstable();
        let examples = keep.into_iter().map(|i| self.examples[i].clone()).collect();
        Ok(Dataset {
            examples,
            window: self.window,
            dim: self.dim,
        })
    }

    /// Debug text format: header `m width`, then one line per example with
    /// the tag followed by the feature components.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.examples.len(), self.feature_len());
        for e in &self.examples {
            out.push_str(e.tag.long());
            for v in &e.features {
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

    /// Parses the debug format. The window half-width is not stored in the
    /// file and must be supplied.
    pub fn parse(text: &str, window: usize, origin: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(origin, 1, "missing header"))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(origin, 1, "header must be \"m width\""))?;
        let [m, width] = nums[..] else {
            return Err(Error::parse(origin, 1, "header must be \"m width\""));
        };
        let span = 2 * window + 1;
        if width % span != 0 {
            return Err(Error::parse(
                origin,
                1,
                format!("width {width} not divisible by window size {span}"),
            ));
        }
        let mut examples = Vec::with_capacity(m);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let tag: Tag = parts
                .next()
                .unwrap_or_default()
                .parse()
                .map_err(|e: Error| Error::parse(origin, i + 1, e.to_string()))?;
            let features: Vec<f64> = parts
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(origin, i + 1, "bad number"))?;
            if features.len() != width {
                return Err(Error::parse(
                    origin,
                    i + 1,
                    format!("expected {width} features, got {}", features.len()),
                ));
            }
            examples.push(WindowExample { features, tag });
        }
        if examples.len() != m {
            return Err(Error::parse(
                origin,
                1,
                format!("header declares {m} examples, file has {}", examples.len()),
            ));
        }
        Dataset::new(examples, window, width / span)
    }
}

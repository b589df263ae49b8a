//! One-hidden-layer window scorer.
//!
//! For a window feature vector `x`, the score of tag `y` is
//! `S[y] · tanh(W x + b)`, with one output row per tag. Training minimizes
//! the multiclass hinge loss
//! `max(0, 1 - score[t] + max_{y != t} score[y])`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::dataset::{window_features, WindowExample};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::EntitySpan;
use crate::tag::Tag;

const FORMAT_HEADER: &str = "linkner-model 1";

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    hidden: usize,
    window: usize,
    dim: usize,
    /// `hidden x input_len`, row-major.
    pub(crate) hidden_weights: Vec<f64>,
    pub(crate) hidden_bias: Vec<f64>,
    /// `Tag::COUNT x hidden`, row `y` scores tag `y`.
    pub(crate) output_weights: Vec<f64>,
}

/// Parameter-shaped gradient (or accumulator) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub hidden_weights: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub output_weights: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &Model) -> Self {
        Gradients {
            hidden_weights: vec![0.0; model.hidden_weights.len()],
            hidden_bias: vec![0.0; model.hidden_bias.len()],
            output_weights: vec![0.0; model.output_weights.len()],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.iter().all(|g| g == 0.0)
    }

    pub fn clear(&mut self) {
        self.hidden_weights.fill(0.0);
        self.hidden_bias.fill(0.0);
        self.output_weights.fill(0.0);
    }

    /// All components in `(hidden_weights, hidden_bias, output_weights)`
    /// order, the same order as [`Model::params`].
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.hidden_weights
            .iter()
            .chain(&self.hidden_bias)
            .chain(&self.output_weights)
            .copied()
    }
}

/// Per-example hinge term and the highest-scoring wrong tag (first in tag
/// order on ties).
#[inline]
pub fn margin_loss(scores: &[f64; Tag::COUNT], tag: Tag) -> (f64, usize) {
    let t = tag.index();
    let mut wrong = usize::MAX;
    let mut best = f64::NEG_INFINITY;
    for (y, &s) in scores.iter().enumerate() {
        if y != t && (wrong == usize::MAX || s > best) {
            best = s;
            wrong = y;
        }
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return (f64::NAN, wrong);
    }
    ((1.0 - scores[t] + best).max(0.0), wrong)
}

impl Model {
    pub fn zeros(hidden: usize, window: usize, dim: usize) -> Result<Self> {
        if hidden == 0 || dim == 0 {
            return Err(Error::invalid("hidden size and dimension must be positive"));
        }
        let input = (2 * window + 1) * dim;
        Ok(Model {
            hidden,
            window,
            dim,
            hidden_weights: vec![0.0; hidden * input],
            hidden_bias: vec![0.0; hidden],
            output_weights: vec![0.0; Tag::COUNT * hidden],
        })
    }

    /// Every parameter drawn uniformly from `[-scale, scale]`.
    pub fn random<R: Rng>(
        hidden: usize,
        window: usize,
        dim: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut m = Model::zeros(hidden, window, dim)?;
        if scale > 0.0 {
            for p in m.params_mut() {
                *p = rng.gen_range(-scale..=scale);
            }
        }
        Ok(m)
    }

    pub fn from_parts(
        window: usize,
        dim: usize,
        hidden_weights: Vec<Vec<f64>>,
        hidden_bias: Vec<f64>,
        output_weights: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let hidden = hidden_bias.len();
        let mut m = Model::zeros(hidden, window, dim)?;
        let input = m.input_len();
        if hidden_weights.len() != hidden {
            return Err(Error::Shape {
                expected: hidden,
                got: hidden_weights.len(),
            });
        }
        if output_weights.len() != Tag::COUNT {
            return Err(Error::Shape {
                expected: Tag::COUNT,
                got: output_weights.len(),
            });
        }
        for row in &hidden_weights {
            if row.len() != input {
                return Err(Error::Shape {
                    expected: input,
                    got: row.len(),
                });
            }
        }
        for row in &output_weights {
            if row.len() != hidden {
                return Err(Error::Shape {
                    expected: hidden,
                    got: row.len(),
                });
            }
        }
        m.hidden_weights = hidden_weights.concat();
        m.hidden_bias = hidden_bias;
        m.output_weights = output_weights.concat();
        if m.params().any(|p| !p.is_finite()) {
            return Err(Error::invalid("non-finite parameter"));
        }
        Ok(m)
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn input_len(&self) -> usize {
        (2 * self.window + 1) * self.dim
    }

    pub fn param_count(&self) -> usize {
        self.hidden_weights.len() + self.hidden_bias.len() + self.output_weights.len()
    }

    pub fn params(&self) -> impl Iterator<Item = f64> + '_ {
        self.hidden_weights
            .iter()
            .chain(&self.hidden_bias)
            .chain(&self.output_weights)
            .copied()
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.hidden_weights
            .iter_mut()
            .chain(self.hidden_bias.iter_mut())
            .chain(self.output_weights.iter_mut())
    }

    pub fn output_row(&self, tag: Tag) -> &[f64] {
        let h = self.hidden;
        &self.output_weights[tag.index() * h..(tag.index() + 1) * h]
    }

    pub fn output_row_mut(&mut self, tag: Tag) -> &mut [f64] {
        let h = self.hidden;
        &mut self.output_weights[tag.index() * h..(tag.index() + 1) * h]
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.input_len() {
            return Err(Error::Shape {
                expected: self.input_len(),
                got: features.len(),
            });
        }
        Ok(())
    }

    /// `tanh(W x + b)` into `out`.
    pub(crate) fn activations(&self, x: &[f64], out: &mut [f64]) {
        let input = x.len();
        for (j, (a, row)) in out
            .iter_mut()
            .zip(self.hidden_weights.chunks_exact(input))
            .enumerate()
        {
            let mut z = self.hidden_bias[j];
            for (w, v) in row.iter().zip(x) {
                z += w * v;
            }
            *a = z.tanh();
        }
    }

    pub(crate) fn scores_from(&self, activations: &[f64]) -> [f64; Tag::COUNT] {
        let mut scores = [0.0; Tag::COUNT];
        for (s, row) in scores
            .iter_mut()
            .zip(self.output_weights.chunks_exact(self.hidden))
        {
            *s = row.iter().zip(activations).map(|(w, a)| w * a).sum();
        }
        scores
    }

    pub fn score(&self, features: &[f64]) -> Result<[f64; Tag::COUNT]> {
        self.check_input(features)?;
        let mut act = vec![0.0; self.hidden];
        self.activations(features, &mut act);
        Ok(self.scores_from(&act))
    }

    /// Highest-scoring tag; ties go to the earliest tag in `Tag::ALL`.
    pub fn predict(&self, features: &[f64]) -> Result<Tag> {
        Ok(argmax(&self.score(features)?))
    }

    /// Tags every token of every sentence from its window.
    pub fn predict_tags<S: AsRef<str>>(
        &self,
        sentences: &[Vec<S>],
        table: &EmbeddingTable,
    ) -> Result<Vec<Vec<Tag>>> {
        if table.dim() != self.dim {
            return Err(Error::Shape {
                expected: self.dim,
                got: table.dim(),
            });
        }
        let mut buf = Vec::with_capacity(self.input_len());
        let mut act = vec![0.0; self.hidden];
        Ok(sentences
            .iter()
            .map(|tokens| {
                (0..tokens.len())
                    .map(|i| {
                        window_features(tokens, i, self.window, table, &mut buf);
                        self.activations(&buf, &mut act);
                        argmax(&self.scores_from(&act))
                    })
                    .collect()
            })
            .collect())
    }

    /// Adds `weight` times the hinge subgradient of `example` into `grads`
    /// and returns the example's loss. `act` is scratch of length `hidden`.
    pub(crate) fn accumulate_gradient(
        &self,
        example: &WindowExample,
        weight: f64,
        act: &mut [f64],
        grads: &mut Gradients,
    ) -> f64 {
        let x = &example.features;
        self.activations(x, act);
        let scores = self.scores_from(act);
        let (loss, wrong) = margin_loss(&scores, example.tag);
        if loss <= 0.0 {
            return loss;
        }
        let h = self.hidden;
        let t = example.tag.index();
        let input = x.len();
        for (j, &a) in act.iter().enumerate() {
            grads.output_weights[t * h + j] -= weight * a;
            grads.output_weights[wrong * h + j] += weight * a;
            let upstream = self.output_weights[wrong * h + j] - self.output_weights[t * h + j];
            let dz = weight * upstream * (1.0 - a * a);
            if dz == 0.0 {
                continue;
            }
            grads.hidden_bias[j] += dz;
            let row = &mut grads.hidden_weights[j * input..(j + 1) * input];
            for (g, v) in row.iter_mut().zip(x) {
                *g += dz * v;
            }
        }
        loss
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_HEADER}");
        let _ = writeln!(out, "hidden {}", self.hidden);
        let _ = writeln!(out, "window {}", self.window);
        let _ = writeln!(out, "dim {}", self.dim);
        let tags: Vec<&str> = Tag::ALL.iter().map(|t| t.long()).collect();
        let _ = writeln!(out, "tags {}", tags.join(" "));
        let write_rows = |out: &mut String, name: &str, data: &[f64], width: usize| {
            let _ = writeln!(out, "{name}");
            for row in data.chunks_exact(width) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        };
        write_rows(
            &mut out,
            "hidden_weights",
            &self.hidden_weights,
            self.input_len(),
        );
        write_rows(&mut out, "hidden_bias", &self.hidden_bias, self.hidden);
        write_rows(
            &mut out,
            "output_weights",
            &self.output_weights,
            self.hidden,
        );
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Model::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines.next().map(|(i, l)| (i + 1, l)).ok_or_else(|| {
                Error::parse(
                    origin,
                    0,
                    format!("unexpected end of file, expected {what}"),
                )
            })
        };
        let (ln, header) = next("header")?;
        if header.trim() != FORMAT_HEADER {
            return Err(Error::parse(
                origin,
                ln,
                format!("expected {FORMAT_HEADER:?}"),
            ));
        }
        let mut field = |name: &str| -> Result<usize> {
            let (ln, line) = next(name)?;
            match line.split_once(' ') {
                Some((k, v)) if k == name => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(origin, ln, format!("bad {name}"))),
                _ => Err(Error::parse(origin, ln, format!("expected {name}"))),
            }
        };
        let hidden = field("hidden")?;
        let window = field("window")?;
        let dim = field("dim")?;
        let (ln, tags) = next("tags")?;
        let expected: Vec<&str> = Tag::ALL.iter().map(|t| t.long()).collect();
        let got: Vec<&str> = tags.split_whitespace().skip(1).collect();
        if !tags.starts_with("tags ") || got != expected {
            return Err(Error::parse(origin, ln, "unsupported tag order"));
        }
        let input = (2 * window + 1) * dim;
        let mut block = |name: &str, rows: usize, width: usize| -> Result<Vec<Vec<f64>>> {
            let (ln, line) = next(name)?;
            if line.trim() != name {
                return Err(Error::parse(origin, ln, format!("expected {name}")));
            }
            (0..rows)
                .map(|_| {
                    let (ln, line) = next(name)?;
                    let row: Vec<f64> = line
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::parse(origin, ln, "bad number"))?;
                    if row.len() != width {
                        return Err(Error::parse(
                            origin,
                            ln,
                            format!("expected {width} values, got {}", row.len()),
                        ));
                    }
                    Ok(row)
                })
                .collect()
        };
        let w = block("hidden_weights", hidden, input)?;
        let b = block("hidden_bias", 1, hidden)?;
        let s = block("output_weights", Tag::COUNT, hidden)?;
        let b = b.into_iter().next().unwrap_or_default();
        Model::from_parts(window, dim, w, b, s)
    }
}

#[inline]
fn argmax(scores: &[f64; Tag::COUNT]) -> Tag {
    let mut best = 0;
    for y in 1..Tag::COUNT {
        if scores[y] > scores[best] {
            best = y;
        }
    }
    Tag::ALL[best]
}

/// Mean hinge loss over a batch.
pub fn hinge_loss(model: &Model, batch: &[WindowExample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("hinge loss of an empty batch"));
    }
    let mut total = 0.0;
    for ex in batch {
        total += margin_loss(&model.score(&ex.features)?, ex.tag).0;
    }
    Ok(total / batch.len() as f64)
}

/// Exact subgradient of one example's hinge term with respect to every
/// parameter. Zero when the margin is met.
pub fn gradients(model: &Model, example: &WindowExample) -> Result<Gradients> {
    model.check_input(&example.features)?;
    let mut grads = Gradients::zeros_like(model);
    let mut act = vec![0.0; model.hidden];
    model.accumulate_gradient(example, 1.0, &mut act, &mut grads);
    Ok(grads)
}

/// Maximal runs of one entity category become spans; `NONENTITY` and tag
/// changes end a run.
pub fn decode_spans(sentence: usize, tags: &[Tag]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut start = 0;
    for i in 1..=tags.len() {
        if i == tags.len() || tags[i] != tags[start] {
            if tags[start].is_entity() {
                spans.push(EntitySpan::new(sentence, start, i, tags[start]));
            }
            start = i;
        }
    }
    spans
}

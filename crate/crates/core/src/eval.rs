//! Phrase-level exact-match F1, and distant evaluation over sentence pairs.
//!
//! Distant evaluation compares, category by category, how many entities two
//! annotators find in each sentence of an aligned pair (typically a source
//! sentence tagged by a reference annotator and its machine translation
//! tagged by the annotator under test). With `C_e(S)` the number of spans of
//! category `e` in sentence `S` and `Z_e` the source-side total,
//!
//! ```text
//! E_M(e) = Σ max(0, C_e(S1) - C_e(S2)) / Z_e     (omissions)
//! E_A(e) = Σ max(0, C_e(S2) - C_e(S1)) / Z_e     (additions)
//! ```

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tag::Tag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub sentence: usize,
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub category: Tag,
}

impl EntitySpan {
    pub fn new(sentence: usize, start: usize, end: usize, category: Tag) -> Self {
        debug_assert!(end > start, "empty span");
        debug_assert!(category.is_entity(), "span of NONENTITY");
        EntitySpan {
            sentence,
            start,
            end,
            category,
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub correct: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Prf {
    /// Empty denominators yield 0.
    pub fn from_counts(correct: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(correct, predicted);
        let recall = ratio(correct, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
            correct,
            predicted,
            gold,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Report {
    pub overall: Prf,
    /// Indexed by `Tag::ENTITIES` order.
    pub per_category: [(Tag, Prf); 3],
}

impl F1Report {
    pub fn category(&self, tag: Tag) -> Option<&Prf> {
        self.per_category
            .iter()
            .find(|(t, _)| *t == tag)
            .map(|(_, p)| p)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("category\tprecision\trecall\tf1\tcorrect\tpredicted\tgold\n");
        let rows = self
            .per_category
            .iter()
            .map(|(t, p)| (t.long(), p))
            .chain([("OVERALL", &self.overall)]);
        for (name, p) in rows {
            let _ = writeln!(
                out,
                "{name}\t{:.4}\t{:.4}\t{:.4}\t{}\t{}\t{}",
                p.precision, p.recall, p.f1, p.correct, p.predicted, p.gold
            );
        }
        out
    }
}

/// Exact-match P/R/F1. A predicted span is correct iff an identical
/// `(sentence, start, end, category)` span is in gold. Duplicate spans are
/// counted once.
pub fn exact_f1(gold: &[EntitySpan], pred: &[EntitySpan]) -> F1Report {
    let gold: HashSet<&EntitySpan> = gold.iter().collect();
    let pred: HashSet<&EntitySpan> = pred.iter().collect();
    let mut correct = [0usize; Tag::COUNT];
    let mut n_pred = [0usize; Tag::COUNT];
    let mut n_gold = [0usize; Tag::COUNT];
    for p in &pred {
        n_pred[p.category.index()] += 1;
        if gold.contains(p) {
            correct[p.category.index()] += 1;
        }
    }
    for g in &gold {
        n_gold[g.category.index()] += 1;
    }
    let per_category = Tag::ENTITIES.map(|t| {
        let i = t.index();
        (t, Prf::from_counts(correct[i], n_pred[i], n_gold[i]))
    });
    let overall = Prf::from_counts(correct.iter().sum(), pred.len(), gold.len());
    F1Report {
        overall,
        per_category,
    }
}

/// `C_e(S)`: number of spans of `category` among one sentence's spans.
pub fn count_entities(spans: &[EntitySpan], category: Tag) -> usize {
    spans.iter().filter(|s| s.category == category).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryErrors {
    pub category: Tag,
    pub z: usize,
    /// `None` when the category never occurs on the source side.
    pub omission: Option<f64>,
    pub addition: Option<f64>,
    /// Raw sums before normalization.
    pub omitted: usize,
    pub added: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistantErrorReport {
    pub categories: [CategoryErrors; 3],
    /// Mean over categories with `Z_e > 0`; `None` if there are none.
    pub macro_omission: Option<f64>,
    pub macro_addition: Option<f64>,
}

impl DistantErrorReport {
    pub fn category(&self, tag: Tag) -> Option<&CategoryErrors> {
        self.categories.iter().find(|c| c.category == tag)
    }

    /// TSV with one row per category plus a `MACRO` row. Undefined values
    /// are written as `undefined`.
    pub fn to_tsv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or_else(|| "undefined".to_string(), |x| format!("{x}"));
        let mut out = String::from("category\tZ_e\tE_M\tE_A\n");
        for c in &self.categories {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                c.category.long(),
                c.z,
                fmt(c.omission),
                fmt(c.addition)
            );
        }
        let z: usize = self.categories.iter().map(|c| c.z).sum();
        let _ = writeln!(
            out,
            "MACRO\t{z}\t{}\t{}",
            fmt(self.macro_omission),
            fmt(self.macro_addition)
        );
        out
    }
}

/// Omission and addition errors between sentence-aligned annotation sets.
/// `source[i]` and `target[i]` hold the spans of the i-th sentence pair.
pub fn distant_errors(
    source: &[Vec<EntitySpan>],
    target: &[Vec<EntitySpan>],
) -> Result<DistantErrorReport> {
    if source.len() != target.len() {
        return Err(Error::Alignment {
            index: source.len().min(target.len()),
            msg: format!(
                "source has {} sentences, target has {}",
                source.len(),
                target.len()
            ),
        });
    }
    let categories = Tag::ENTITIES.map(|cat| {
        let mut z = 0;
        let mut omitted = 0;
        let mut added = 0;
        for (s1, s2) in source.iter().zip(target) {
            let c1 = count_entities(s1, cat);
            let c2 = count_entities(s2, cat);
            z += c1;
            omitted += c1.saturating_sub(c2);
            added += c2.saturating_sub(c1);
        }
        let norm = |x: usize| (z > 0).then(|| x as f64 / z as f64);
        CategoryErrors {
            category: cat,
            z,
            omission: norm(omitted),
            addition: norm(added),
            omitted,
            added,
        }
    });
    let mean = |f: fn(&CategoryErrors) -> Option<f64>| {
        let vals: Vec<f64> = categories.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    Ok(DistantErrorReport {
        macro_omission: mean(|c| c.omission),
        macro_addition: mean(|c| c.addition),
        categories,
    })
}

/// Seeded uniform sample of `count` sentence indices among sentences with at
/// least one span. Indices are returned in ascending order.
pub fn select_eval_sentences(
    annotated: &[Vec<EntitySpan>],
    count: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let pool: Vec<usize> = annotated
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.is_empty())
        .map(|(i, _)| i)
        .collect();
    if pool.len() < count || pool.is_empty() {
        return Err(Error::invalid(format!(
            "need {count} sentences with entities, found {}",
            pool.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = sample(&mut rng, pool.len(), count)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    picked.sort_unstable();
    Ok(picked)
}

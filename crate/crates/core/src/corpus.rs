//! Turning link-annotated articles into a word-level labeled corpus.
//!
//! Labeling happens in two stages. [`label_from_links`] tags the anchor
//! tokens of links whose target resolves to an entity category. Because
//! articles usually link only the first mention of an entity (and never
//! link to themselves), [`surface_match`] then propagates those tags to
//! every other occurrence of the same word within the article.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::kb::{normalize_title, TitleIndex};
use crate::tag::Tag;

/// An anchor: `(sentence, start, end_exclusive, target_title)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link(pub usize, pub usize, pub usize, pub String);

impl Link {
    pub fn new(sentence: usize, start: usize, end: usize, target: impl Into<String>) -> Self {
        Link(sentence, start, end, target.into())
    }

    pub fn sentence(&self) -> usize {
        self.0
    }
    pub fn start(&self) -> usize {
        self.1
    }
    pub fn end(&self) -> usize {
        self.2
    }
    pub fn target(&self) -> &str {
        &self.3
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: String,
    pub title: String,
    pub sentences: Vec<Vec<String>>,
    #[serde(default)]
    pub links: Vec<Link>,
}

impl Article {
    /// Checks that every link lies inside its sentence, is non-empty, and
    /// does not overlap another link in the same sentence.
    pub fn validate(&self) -> Result<()> {
        let span_err = |sentence: usize, msg: String| Error::Span {
            article: self.id.clone(),
            sentence,
            msg,
        };
        let mut by_sentence: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
        for link in &self.links {
            let s = link.sentence();
            let len = self
                .sentences
                .get(s)
                .ok_or_else(|| span_err(s, "link refers to a missing sentence".into()))?
                .len();
            if link.end() <= link.start() {
                return Err(span_err(
                    s,
                    format!("empty link span [{}, {})", link.start(), link.end()),
                ));
            }
            if link.end() > len {
                return Err(span_err(
                    s,
                    format!(
                        "link span [{}, {}) exceeds {} tokens",
                        link.start(),
                        link.end(),
                        len
                    ),
                ));
            }
            by_sentence
                .entry(s)
                .or_default()
                .push((link.start(), link.end()));
        }
        for (s, mut spans) in by_sentence {
            spans.sort_unstable();
            if let Some(w) = spans.windows(2).find(|w| w[1].0 < w[0].1) {
                return Err(span_err(
                    s,
                    format!("overlapping links {:?} and {:?}", w[0], w[1]),
                ));
            }
        }
        Ok(())
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Reads a JSON-lines article file. Blank lines are skipped.
pub fn read_articles(path: impl AsRef<Path>) -> Result<Vec<Article>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_articles(&text, &path.display().to_string())
}

pub fn parse_articles(text: &str, origin: &str) -> Result<Vec<Article>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let article: Article =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        out.push(article);
    }
    Ok(out)
}

pub fn write_articles(path: impl AsRef<Path>, articles: &[Article]) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for a in articles {
        out.push_str(&serde_json::to_string(a).expect("article serializes"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Tokenized sentences with one category per token.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabeledCorpus {
    sentences: Vec<Vec<String>>,
    tags: Vec<Vec<Tag>>,
}

impl LabeledCorpus {
    pub fn new(sentences: Vec<Vec<String>>, tags: Vec<Vec<Tag>>) -> Result<Self> {
        if sentences.len() != tags.len() {
            return Err(Error::Shape {
                expected: sentences.len(),
                got: tags.len(),
            });
        }
        for (i, (s, t)) in sentences.iter().zip(&tags).enumerate() {
            if s.len() != t.len() {
                return Err(Error::Alignment {
                    index: i,
                    msg: format!("{} tokens but {} tags", s.len(), t.len()),
                });
            }
        }
        Ok(LabeledCorpus { sentences, tags })
    }

    /// Every token tagged `NONENTITY`.
    pub fn unlabeled(sentences: Vec<Vec<String>>) -> Self {
        let tags = sentences
            .iter()
            .map(|s| vec![Tag::NonEntity; s.len()])
            .collect();
        LabeledCorpus { sentences, tags }
    }

    pub fn sentences(&self) -> &[Vec<String>] {
        &self.sentences
    }

    pub fn tags(&self) -> &[Vec<Tag>] {
        &self.tags
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[String], &[Tag])> {
        self.sentences
            .iter()
            .zip(&self.tags)
            .map(|(s, t)| (s.as_slice(), t.as_slice()))
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn entity_token_count(&self) -> usize {
        self.tags.iter().flatten().filter(|t| t.is_entity()).count()
    }

    pub fn extend(&mut self, other: LabeledCorpus) {
        self.sentences.extend(other.sentences);
        self.tags.extend(other.tags);
    }

    /// Fraction of tokens carrying an entity tag.
    pub fn phrase_coverage(&self) -> Result<f64> {
        let total = self.token_count();
        if total == 0 {
            return Err(Error::invalid("phrase coverage of an empty corpus"));
        }
        Ok(self.entity_token_count() as f64 / total as f64)
    }
}

impl FromIterator<LabeledCorpus> for LabeledCorpus {
    fn from_iter<I: IntoIterator<Item = LabeledCorpus>>(iter: I) -> Self {
        let mut out = LabeledCorpus::default();
        for c in iter {
            out.extend(c);
        }
        out
    }
}

/// Tags anchor tokens whose link target resolves to an entity category.
pub fn label_from_links(article: &Article, index: &TitleIndex) -> Result<LabeledCorpus> {
    article.validate()?;
    let mut corpus = LabeledCorpus::unlabeled(article.sentences.clone());
    for link in &article.links {
        let cat = index.resolve(link.target());
        if cat.is_entity() {
            corpus.tags[link.sentence()][link.start()..link.end()].fill(cat);
        }
    }
    Ok(corpus)
}

/// The `k` most frequent vocabulary words, which surface matching never
/// propagates (function words such as "of", "the", "de").
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionList {
    words: HashSet<String>,
}

impl ExclusionList {
    pub const DEFAULT_SIZE: usize = 1000;

    /// Takes the first `min(k, |V|)` words of a frequency-ordered vocabulary.
    pub fn from_table(table: &EmbeddingTable, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("exclusion list size must be positive"));
        }
        Ok(table.words().iter().take(k).cloned().collect())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for ExclusionList {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        ExclusionList {
            words: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Exact surface-form matching within one article.
///
/// Builds a word→tag table from every token inside an entity-tagged span
/// plus, when the article itself is an entity, the words of its title.
/// A word seen with several tags keeps its most frequent one; ties go to
/// `PERSON > LOCATION > ORGANIZATION`. Excluded words are dropped from the
/// table, then every `NONENTITY` token whose word is in the table takes
/// that tag. Tags that are already entities are never changed.
pub fn surface_match(
    labeled: &LabeledCorpus,
    article_title: &str,
    title_category: Tag,
    exclusion: &ExclusionList,
) -> LabeledCorpus {
    let mut votes: HashMap<&str, [usize; Tag::COUNT]> = HashMap::new();
    for (tokens, tags) in labeled.iter() {
        for (tok, &tag) in tokens.iter().zip(tags) {
            if tag.is_entity() {
                votes.entry(tok.as_str()).or_default()[tag.index()] += 1;
            }
        }
    }
    let title = normalize_title(article_title);
    if title_category.is_entity() {
        for word in title.split(' ').filter(|w| !w.is_empty()) {
            votes.entry(word).or_default()[title_category.index()] += 1;
        }
    }

    let table: HashMap<&str, Tag> = votes
        .into_iter()
        .filter(|(w, _)| !exclusion.contains(w))
        .map(|(w, counts)| {
            // max_by_key keeps the last maximum; iterate in reverse precedence
            // so the earliest entity category wins ties.
            let best = Tag::ENTITIES
                .into_iter()
                .rev()
                .max_by_key(|t| counts[t.index()])
                .expect("non-empty");
            (w, best)
        })
        .collect();

    let mut out = labeled.clone();
    for (tokens, tags) in out.sentences.iter().zip(out.tags.iter_mut()) {
        for (tok, tag) in tokens.iter().zip(tags.iter_mut()) {
            if *tag == Tag::NonEntity {
                if let Some(&t) = table.get(tok.as_str()) {
                    *tag = t;
                }
            }
        }
    }
    out
}

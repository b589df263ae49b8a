//! Two-column CoNLL files: `token<TAB>tag`, blank line between sentences.
//!
//! Reading accepts IOB1 and IOB2 tags (and bare category labels), takes the
//! first column as the token and the last as the tag, so four-column
//! CoNLL-2003 files load unchanged. Entity types outside PER/LOC/ORG (such
//! as MISC) are read as `O`. `# article <id>` lines separate documents;
//! `-DOCSTART-` lines are ignored.
//!
//! Writing always emits IOB2.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::LabeledCorpus;
use crate::error::{Error, Result};
use crate::eval::EntitySpan;
use crate::tag::Tag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Iob {
    Outside,
    Begin(Tag),
    Inside(Tag),
}

impl Iob {
    pub fn parse(label: &str) -> Result<Iob> {
        if label == "O" {
            return Ok(Iob::Outside);
        }
        let (prefix, kind) = match label.split_once('-') {
            Some((p, k)) if p == "B" || p == "I" || p == "E" || p == "S" => (p, k),
            _ => ("I", label),
        };
        let tag = match Tag::from_label(kind) {
            Some(t) => t,
            None if kind.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                return Ok(Iob::Outside)
            }
            None => return Err(Error::invalid(format!("unrecognized tag {label:?}"))),
        };
        Ok(match (prefix, tag) {
            (_, Tag::NonEntity) => Iob::Outside,
            ("B" | "S", t) => Iob::Begin(t),
            (_, t) => Iob::Inside(t),
        })
    }

    pub fn tag(self) -> Tag {
        match self {
            Iob::Outside => Tag::NonEntity,
            Iob::Begin(t) | Iob::Inside(t) => t,
        }
    }

    pub fn label(self) -> String {
        match self {
            Iob::Outside => "O".to_string(),
            Iob::Begin(t) => format!("B-{}", t.short()),
            Iob::Inside(t) => format!("I-{}", t.short()),
        }
    }
}

/// Converts IOB1/IOB2 tags to spans. A span starts at `B-X`, or at `I-X`
/// when the previous token is not of type X.
pub fn iob_to_spans(sentence: usize, tags: &[Iob]) -> Vec<EntitySpan> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, Tag)> = None;
    for (i, &iob) in tags.iter().enumerate() {
        let starts_new = match (iob, open) {
            (Iob::Outside, _) => None,
            (Iob::Begin(t), _) => Some(t),
            (Iob::Inside(t), Some((_, cur))) if cur == t => None,
            (Iob::Inside(t), _) => Some(t),
        };
        if iob == Iob::Outside || starts_new.is_some() {
            if let Some((start, cat)) = open.take() {
                spans.push(EntitySpan::new(sentence, start, i, cat));
            }
        }
        if let Some(t) = starts_new {
            open = Some((i, t));
        }
    }
    if let Some((start, cat)) = open {
        spans.push(EntitySpan::new(sentence, start, tags.len(), cat));
    }
    spans
}

/// IOB2 encoding of word-level tags: maximal runs of one category become
/// one chunk.
pub fn tags_to_iob(tags: &[Tag]) -> Vec<Iob> {
    let mut prev = Tag::NonEntity;
    tags.iter()
        .map(|&t| {
            let iob = match t {
                Tag::NonEntity => Iob::Outside,
                t if t == prev => Iob::Inside(t),
                t => Iob::Begin(t),
            };
            prev = t;
            iob
        })
        .collect()
}

/// IOB2 encoding of explicit spans over a sentence of `len` tokens.
pub fn spans_to_iob(len: usize, spans: &[EntitySpan]) -> Vec<Iob> {
    let mut out = vec![Iob::Outside; len];
    for s in spans {
        out[s.start] = Iob::Begin(s.category);
        for slot in &mut out[s.start + 1..s.end] {
            *slot = Iob::Inside(s.category);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub tags: Vec<Iob>,
}

impl Sentence {
    pub fn word_tags(&self) -> Vec<Tag> {
        self.tags.iter().map(|t| t.tag()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub id: Option<String>,
    pub sentences: Vec<Sentence>,
}

impl Document {
    pub fn to_labeled(&self) -> LabeledCorpus {
        let tokens = self.sentences.iter().map(|s| s.tokens.clone()).collect();
        let tags = self.sentences.iter().map(Sentence::word_tags).collect();
        LabeledCorpus::new(tokens, tags).expect("sentence shapes match")
    }
}

pub fn read(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text, &path.display().to_string())
}

pub fn parse(text: &str, origin: &str) -> Result<Vec<Document>> {
    let mut docs: Vec<Document> = Vec::new();
    let mut current = Document::default();
    let mut sentence = Sentence {
        tokens: Vec::new(),
        tags: Vec::new(),
    };

    fn flush_sentence(doc: &mut Document, s: &mut Sentence) {
        if !s.tokens.is_empty() {
            doc.sentences.push(std::mem::replace(
                s,
                Sentence {
                    tokens: Vec::new(),
                    tags: Vec::new(),
                },
            ));
        }
    }

    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim_end_matches('\r');
        if trimmed.trim().is_empty() {
            flush_sentence(&mut current, &mut sentence);
            continue;
        }
        if !trimmed.contains('\t') && trimmed.starts_with("# ") {
            if let Some(id) = trimmed.strip_prefix("# article ") {
                flush_sentence(&mut current, &mut sentence);
                if current.id.is_some() || !current.sentences.is_empty() {
                    docs.push(std::mem::take(&mut current));
                }
                current.id = Some(id.trim().to_string());
            }
            continue;
        }
        if trimmed.starts_with("-DOCSTART-") {
            flush_sentence(&mut current, &mut sentence);
            continue;
        }
        let fields: Vec<&str> = if trimmed.contains('\t') {
            trimmed.split('\t').collect()
        } else {
            trimmed.split_whitespace().collect()
        };
        let (token, tag) = match fields.as_slice() {
            [tok] => (*tok, "O"),
            [tok, .., tag] => (*tok, *tag),
            [] => unreachable!("non-empty line"),
        };
        let tag = Iob::parse(tag).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        sentence.tokens.push(token.to_string());
        sentence.tags.push(tag);
    }
    flush_sentence(&mut current, &mut sentence);
    if current.id.is_some() || !current.sentences.is_empty() {
        docs.push(current);
    }
    Ok(docs)
}

/// All sentences of all documents, in order.
pub fn flatten(docs: &[Document]) -> Vec<&Sentence> {
    docs.iter().flat_map(|d| &d.sentences).collect()
}

/// Spans of every sentence, numbered consecutively across documents.
pub fn spans(docs: &[Document]) -> Vec<Vec<EntitySpan>> {
    flatten(docs)
        .into_iter()
        .enumerate()
        .map(|(i, s)| iob_to_spans(i, &s.tags))
        .collect()
}

/// Writes labeled documents in IOB2, each preceded by `# article <id>`
/// when it has an id.
pub fn format_labeled<'a, I>(docs: I) -> String
where
    I: IntoIterator<Item = (Option<&'a str>, &'a LabeledCorpus)>,
{
    let mut out = String::new();
    for (id, corpus) in docs {
        if let Some(id) = id {
            let _ = writeln!(out, "# article {id}");
        }
        for (tokens, tags) in corpus.iter() {
            write_sentence(&mut out, tokens, &tags_to_iob(tags));
        }
    }
    out
}

pub fn write_sentence(out: &mut String, tokens: &[String], tags: &[Iob]) {
    for (tok, tag) in tokens.iter().zip(tags) {
        let _ = writeln!(out, "{tok}\t{}", tag.label());
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use Tag::*;

    #[test]
    fn iob_labels() {
        assert_eq!(Iob::parse("O").unwrap(), Iob::Outside);
        assert_eq!(Iob::parse("B-PER").unwrap(), Iob::Begin(Person));
        assert_eq!(Iob::parse("I-LOC").unwrap(), Iob::Inside(Location));
        assert_eq!(Iob::parse("B-MISC").unwrap(), Iob::Outside);
        assert_eq!(Iob::parse("ORG").unwrap(), Iob::Inside(Organization));
        assert!(Iob::parse("B-?!").is_err());
    }

    #[test]
    fn iob1_and_iob2_decode_alike() {
        // "EU rejects German call" style
        let iob2 = [
            Iob::Begin(Person),
            Iob::Inside(Person),
            Iob::Outside,
            Iob::Begin(Location),
            Iob::Begin(Location),
        ];
        let iob1 = [
            Iob::Inside(Person),
            Iob::Inside(Person),
            Iob::Outside,
            Iob::Inside(Location),
            Iob::Begin(Location),
        ];
        let expect = vec![
            EntitySpan::new(0, 0, 2, Person),
            EntitySpan::new(0, 3, 4, Location),
            EntitySpan::new(0, 4, 5, Location),
        ];
        assert_eq!(iob_to_spans(0, &iob2), expect);
        assert_eq!(iob_to_spans(0, &iob1), expect);
    }

    #[test]
    fn type_change_splits() {
        let t = [Iob::Inside(Person), Iob::Inside(Location)];
        assert_eq!(
            iob_to_spans(3, &t),
            vec![
                EntitySpan::new(3, 0, 1, Person),
                EntitySpan::new(3, 1, 2, Location)
            ]
        );
    }

    #[test]
    fn parse_documents() {
        let text = "# article a1\nPešek\tB-PER\nnació\tO\n\nPraga\tB-LOC\n\n# article a2\nx\tO\n";
        let docs = parse(text, "mem").unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id.as_deref(), Some("a1"));
        assert_eq!(docs[0].sentences.len(), 2);
        assert_eq!(docs[1].sentences[0].tokens, vec!["x"]);

        let four_col = "-DOCSTART- -X- -X- O\n\nEU NNP B-NP B-ORG\nrejects VBZ B-VP O\n";
        let docs = parse(four_col, "mem").unwrap();
        assert_eq!(
            docs[0].sentences[0].tags,
            vec![Iob::Begin(Organization), Iob::Outside]
        );

        let err = parse("a\tB-\u{1F600}\n", "f.conll").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn hash_token_is_not_a_comment() {
        let docs = parse("#\tO\n# note\n", "mem").unwrap();
        assert_eq!(docs[0].sentences[0].tokens, vec!["#"]);
    }

    #[test]
    fn labeled_roundtrip() {
        let corpus = LabeledCorpus::new(
            vec![vec!["a".into(), "b".into(), "c".into(), "d".into()]],
            vec![vec![Person, Person, NonEntity, Location]],
        )
        .unwrap();
        let text = format_labeled([(Some("9"), &corpus)]);
        assert_eq!(text, "# article 9\na\tB-PER\nb\tI-PER\nc\tO\nd\tB-LOC\n\n");
        let docs = parse(&text, "mem").unwrap();
        assert_eq!(docs[0].to_labeled(), corpus);
    }
}

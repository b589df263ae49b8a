//! Synthetic link-annotated encyclopedia for demos and end-to-end tests.
//!
//! The generated world mimics the properties that matter for distant
//! supervision: entity names come from their own vocabulary strata (and
//! their embeddings cluster by stratum), entities appear in fixed contextual
//! templates ("the mayor of X"), an article links at most the first mention
//! of an entity and never links its own topic, and many entity mentions are
//! never linked at all. Every token also carries its true tag so held-out
//! articles can serve as gold data.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::conll;
use crate::corpus::{write_articles, Article, LabeledCorpus, Link};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::kb::{CategoryRuleSet, TitleIndex};
use crate::tag::Tag;

const FUNCTION_WORDS: &[&str] = &[
    "the", ".", ",", "of", "and", "in", "a", "to", "was", "is", "for", "on", "with", "by", "at",
    "from", "his", "her", "he", "she", "it", "as", "that", "this", "which", "also", "after", "new",
    "an", "its", "many", "about", "near", "later",
];

const NOUNS: &[&str] = &[
    "river",
    "house",
    "city",
    "team",
    "game",
    "music",
    "book",
    "year",
    "war",
    "people",
    "school",
    "church",
    "film",
    "song",
    "album",
    "market",
    "trade",
    "law",
    "night",
    "garden",
    "story",
    "bridge",
    "road",
    "station",
    "festival",
    "harbor",
    "season",
    "island",
    "valley",
    "forest",
    "museum",
    "library",
    "council",
    "election",
    "treaty",
    "army",
    "painting",
    "novel",
    "poem",
    "recording",
    "stadium",
    "tower",
    "castle",
    "factory",
    "railway",
    "village",
    "farm",
    "coast",
    "mountain",
    "winter",
    "summer",
    "spring",
    "history",
    "culture",
    "language",
    "science",
    "theory",
    "family",
    "child",
    "career",
    "report",
    "letter",
    "speech",
    "record",
    "title",
    "award",
    "prize",
    "court",
    "case",
    "budget",
    "plan",
    "project",
    "building",
    "street",
];

const VERBS: &[&str] = &[
    "met",
    "visited",
    "founded",
    "joined",
    "studied",
    "wrote",
    "played",
    "moved",
    "returned",
    "left",
    "won",
    "lost",
    "signed",
    "praised",
    "criticized",
    "built",
    "opened",
    "closed",
    "described",
    "announced",
    "published",
    "supported",
    "opposed",
    "reported",
    "received",
    "released",
    "became",
    "remained",
    "started",
];

const ADJECTIVES: &[&str] = &[
    "old", "large", "small", "famous", "local", "early", "late", "public", "major", "popular",
    "modern", "ancient", "short", "long", "quiet", "busy", "northern", "southern", "rural",
    "central",
];

const CUES: &[&str] = &[
    "mayor",
    "president",
    "capital",
    "minister",
    "coach",
    "company",
    "club",
    "newspaper",
    "town",
    "born",
    "director",
    "province",
    "editor",
    "founder",
    "residents",
];

const ORG_SUFFIXES: &[&str] = &["Group", "United", "Times", "Bank", "Records", "Institute"];

const PERSON_SYLLABLES: &[&str] = &[
    "an", "el", "mar", "ta", "vin", "li", "so", "ra", "do", "mi", "ke", "lo", "ber", "ni", "za",
];
const LOCATION_SYLLABLES: &[&str] = &[
    "tor", "vik", "hal", "mund", "gard", "stad", "berg", "holm", "ford", "wick", "dal", "rup",
];
const ORG_SYLLABLES: &[&str] = &[
    "zen", "tek", "quar", "plex", "vox", "nex", "cor", "dyn", "ax", "trix", "lum", "fin",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Total articles, including held-out ones.
    pub articles: usize,
    /// Fraction of articles held out as gold test data.
    pub heldout: f64,
    pub dim: usize,
    pub seed: u64,
    /// Probability that an article links (the first mention of) a related
    /// entity. Unlinked entities stay unlabeled for the whole article.
    pub link_prob: f64,
    /// Entity-free sentences per article.
    pub filler_sentences: std::ops::RangeInclusive<usize>,
    /// Per-stratum noise around the stratum centroid.
    pub noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            articles: 200,
            heldout: 0.2,
            dim: 16,
            seed: 1,
            link_prob: 0.3,
            filler_sentences: 30..=40,
            noise: 0.35,
        }
    }
}

#[derive(Debug, Clone)]
struct Entity {
    title: String,
    tokens: Vec<String>,
    short: Vec<String>,
    tag: Tag,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub embeddings: EmbeddingTable,
    /// `(title, attributes)` knowledge-base rows.
    pub kb: Vec<(String, Vec<String>)>,
    pub redirects: Vec<(String, String)>,
    pub train: Vec<Article>,
    /// True tags of `train`, article by article.
    pub train_truth: Vec<LabeledCorpus>,
    pub test: Vec<Article>,
    pub test_truth: Vec<LabeledCorpus>,
    /// Number of leading vocabulary words that are function words.
    pub function_words: usize,
}

/// Paths written by [`SyntheticCorpus::write_to`].
#[derive(Debug, Clone)]
pub struct SynthPaths {
    pub embeddings: PathBuf,
    pub kb: PathBuf,
    pub redirects: PathBuf,
    pub corpus: PathBuf,
    pub test_corpus: PathBuf,
    pub test_gold: PathBuf,
}

fn make_names<R: Rng>(
    rng: &mut R,
    syllables: &[&str],
    count: usize,
    taken: &mut HashSet<String>,
) -> Vec<String> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let parts = rng.gen_range(2..=3);
        let mut s = String::new();
        for _ in 0..parts {
            s.push_str(syllables.choose(rng).expect("non-empty"));
        }
        let mut chars = s.chars();
        let name: String = chars
            .next()
            .map(|c| c.to_uppercase().chain(chars).collect())
            .unwrap_or_default();
        if taken.insert(name.to_lowercase()) {
            out.push(name);
        }
    }
    out
}

impl SyntheticCorpus {
    pub fn generate(cfg: &SynthConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut taken: HashSet<String> = FUNCTION_WORDS
            .iter()
            .chain(NOUNS)
            .chain(VERBS)
            .chain(ADJECTIVES)
            .chain(CUES)
            .chain(ORG_SUFFIXES)
            .map(|w| w.to_lowercase())
            .collect();

        let first = make_names(&mut rng, PERSON_SYLLABLES, 50, &mut taken);
        let last = make_names(&mut rng, PERSON_SYLLABLES, 90, &mut taken);
        let places = make_names(&mut rng, LOCATION_SYLLABLES, 80, &mut taken);
        let org_stems = make_names(&mut rng, ORG_SYLLABLES, 60, &mut taken);

        let mut entities = Vec::new();
        for (i, l) in last.iter().enumerate() {
            let f = &first[i % first.len()];
            entities.push(Entity {
                title: format!("{f} {l}"),
                tokens: vec![f.clone(), l.clone()],
                short: vec![l.clone()],
                tag: Tag::Person,
            });
        }
        for p in &places {
            entities.push(Entity {
                title: p.clone(),
                tokens: vec![p.clone()],
                short: vec![p.clone()],
                tag: Tag::Location,
            });
        }
        for (i, stem) in org_stems.iter().enumerate() {
            let suffix = ORG_SUFFIXES[i % ORG_SUFFIXES.len()];
            entities.push(Entity {
                title: format!("{stem} {suffix}"),
                tokens: vec![stem.clone(), suffix.to_string()],
                short: vec![stem.clone(), suffix.to_string()],
                tag: Tag::Organization,
            });
        }

        // vocabulary strata, most frequent first
        let strata: Vec<Vec<String>> = vec![
            FUNCTION_WORDS.iter().map(|s| s.to_string()).collect(),
            NOUNS.iter().map(|s| s.to_string()).collect(),
            VERBS.iter().map(|s| s.to_string()).collect(),
            ADJECTIVES.iter().map(|s| s.to_string()).collect(),
            CUES.iter().map(|s| s.to_string()).collect(),
            ORG_SUFFIXES.iter().map(|s| s.to_string()).collect(),
            first.clone(),
            last.clone(),
            places.clone(),
            org_stems.clone(),
        ];
        let mut rows = Vec::new();
        for words in &strata {
            let centroid: Vec<f64> = (0..cfg.dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal))
                .collect();
            for w in words {
                let v = centroid
                    .iter()
                    .map(|c| c + cfg.noise * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                rows.push((w.clone(), v));
            }
        }
        let embeddings = EmbeddingTable::from_rows(cfg.dim, rows).expect("unique vocabulary");

        let mut kb: Vec<(String, Vec<String>)> = entities
            .iter()
            .map(|e| {
                let attr = match e.tag {
                    Tag::Person => "/people/person",
                    Tag::Location => {
                        if rng.gen_bool(0.5) {
                            "/location/citytown"
                        } else {
                            "/location/region"
                        }
                    }
                    _ => "/organization/organization",
                };
                (
                    e.title.clone(),
                    vec![attr.to_string(), "/common/topic".to_string()],
                )
            })
            .collect();

        let mut redirects = Vec::new();
        let mut last_counts: HashMap<&str, usize> = HashMap::new();
        for e in entities.iter().filter(|e| e.tag == Tag::Person) {
            *last_counts.entry(e.short[0].as_str()).or_default() += 1;
        }
        for e in entities.iter().filter(|e| e.tag == Tag::Person) {
            if last_counts[e.short[0].as_str()] == 1 && rng.gen_bool(0.5) {
                redirects.push((e.short[0].clone(), e.title.clone()));
            }
        }
        let alias_of: HashMap<String, String> = redirects
            .iter()
            .map(|(a, c)| (c.clone(), a.clone()))
            .collect();

        let mut gen = Generator {
            rng,
            entities: &entities,
            cfg,
            alias_of: &alias_of,
        };
        let mut articles = Vec::with_capacity(cfg.articles);
        let mut truths = Vec::with_capacity(cfg.articles);
        for i in 0..cfg.articles {
            let (a, t, topic_title) = gen.article(i);
            if let Some((title, attrs)) = topic_title {
                kb.push((title, attrs));
            }
            articles.push(a);
            truths.push(t);
        }

        let n_test = ((cfg.articles as f64) * cfg.heldout).round() as usize;
        let n_train = cfg.articles - n_test.min(cfg.articles);
        let test = articles.split_off(n_train);
        let test_truth = truths.split_off(n_train);

        SyntheticCorpus {
            embeddings,
            kb,
            redirects,
            train: articles,
            train_truth: truths,
            test,
            test_truth,
            function_words: FUNCTION_WORDS.len(),
        }
    }

    pub fn title_index(&self) -> TitleIndex {
        let rules = CategoryRuleSet::default();
        TitleIndex::build(
            self.kb
                .iter()
                .map(|(t, a)| (t.as_str(), rules.categorize(a))),
            self.redirects.iter().map(|(a, b)| (a.as_str(), b.as_str())),
        )
        .expect("generated index is consistent")
    }

    /// Writes embeddings, KB, redirects, training articles (JSON lines),
    /// held-out articles, and held-out gold tags (CoNLL) into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<SynthPaths> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let paths = SynthPaths {
            embeddings: dir.join("embeddings.txt"),
            kb: dir.join("kb.tsv"),
            redirects: dir.join("redirects.tsv"),
            corpus: dir.join("articles.jsonl"),
            test_corpus: dir.join("heldout.jsonl"),
            test_gold: dir.join("heldout.gold.conll"),
        };
        self.embeddings.save(&paths.embeddings)?;
        let kb: String = self
            .kb
            .iter()
            .map(|(t, a)| format!("{t}\t{}\n", a.join(",")))
            .collect();
        fs::write(&paths.kb, kb).map_err(|e| Error::io(&paths.kb, e))?;
        let red: String = self
            .redirects
            .iter()
            .map(|(a, b)| format!("{a}\t{b}\n"))
            .collect();
        fs::write(&paths.redirects, red).map_err(|e| Error::io(&paths.redirects, e))?;
        write_articles(&paths.corpus, &self.train)?;
        write_articles(&paths.test_corpus, &self.test)?;
        let gold = conll::format_labeled(
            self.test
                .iter()
                .zip(&self.test_truth)
                .map(|(a, t)| (Some(a.id.as_str()), t)),
        );
        fs::write(&paths.test_gold, gold).map_err(|e| Error::io(&paths.test_gold, e))?;
        Ok(paths)
    }

    /// Held-out gold as one corpus.
    pub fn test_gold(&self) -> LabeledCorpus {
        self.test_truth.iter().cloned().collect()
    }
}

struct Generator<'a> {
    rng: ChaCha8Rng,
    entities: &'a [Entity],
    cfg: &'a SynthConfig,
    alias_of: &'a HashMap<String, String>,
}

type Slot = usize;

enum Piece {
    Word(&'static str),
    Entity(Slot),
}

// Sentence templates. `Entity(k)` slots are filled from the article's
// mention plan; the required category of each slot is given alongside.
fn templates() -> Vec<(Vec<Tag>, Vec<Piece>)> {
    use Piece::{Entity as E, Word as W};
    use Tag::*;
    vec![
        (
            vec![Person, Location],
            vec![E(0), W("was"), W("born"), W("in"), E(1), W(".")],
        ),
        (
            vec![Person, Organization],
            vec![
                E(0),
                W("joined"),
                E(1),
                W("after"),
                W("the"),
                W("war"),
                W("."),
            ],
        ),
        (
            vec![Person, Location],
            vec![
                W("later"),
                W(","),
                E(0),
                W("returned"),
                W("to"),
                E(1),
                W("."),
            ],
        ),
        (
            vec![Person],
            vec![
                W("the"),
                W("minister"),
                E(0),
                W("praised"),
                W("the"),
                W("new"),
                W("law"),
                W("."),
            ],
        ),
        (
            vec![Person],
            vec![
                E(0),
                W("wrote"),
                W("a"),
                W("novel"),
                W("about"),
                W("the"),
                W("river"),
                W("."),
            ],
        ),
        (
            vec![Person],
            vec![
                W("president"),
                E(0),
                W("visited"),
                W("the"),
                W("museum"),
                W("."),
            ],
        ),
        (
            vec![Location],
            vec![
                W("the"),
                W("mayor"),
                W("of"),
                E(0),
                W("opened"),
                W("a"),
                W("school"),
                W("."),
            ],
        ),
        (
            vec![Location],
            vec![
                E(0),
                W("is"),
                W("a"),
                W("town"),
                W("near"),
                W("the"),
                W("coast"),
                W("."),
            ],
        ),
        (
            vec![Location],
            vec![
                W("many"),
                W("people"),
                W("moved"),
                W("to"),
                E(0),
                W("in"),
                W("the"),
                W("spring"),
                W("."),
            ],
        ),
        (
            vec![Location],
            vec![
                W("residents"),
                W("of"),
                E(0),
                W("opposed"),
                W("the"),
                W("plan"),
                W("."),
            ],
        ),
        (
            vec![Organization],
            vec![E(0), W("signed"), W("a"), W("new"), W("coach"), W(".")],
        ),
        (
            vec![Organization, Location],
            vec![
                W("the"),
                W("company"),
                E(0),
                W("built"),
                W("a"),
                W("factory"),
                W("in"),
                E(1),
                W("."),
            ],
        ),
        (
            vec![Organization],
            vec![
                W("the"),
                W("newspaper"),
                E(0),
                W("published"),
                W("the"),
                W("report"),
                W("."),
            ],
        ),
        (
            vec![Organization, Person],
            vec![
                E(0),
                W("announced"),
                W("that"),
                E(1),
                W("became"),
                W("director"),
                W("."),
            ],
        ),
    ]
}

impl Generator<'_> {
    fn pick_entity(&mut self, tag: Tag, avoid: &[usize]) -> usize {
        loop {
            let i = self.rng.gen_range(0..self.entities.len());
            if self.entities[i].tag == tag && !avoid.contains(&i) {
                return i;
            }
        }
    }

    fn filler(&mut self) -> Vec<String> {
        let r = &mut self.rng;
        let n = |r: &mut ChaCha8Rng| NOUNS.choose(r).unwrap().to_string();
        let v = |r: &mut ChaCha8Rng| VERBS.choose(r).unwrap().to_string();
        let a = |r: &mut ChaCha8Rng| ADJECTIVES.choose(r).unwrap().to_string();
        let s = |x: &str| x.to_string();
        match r.gen_range(0..5) {
            0 => vec![s("the"), a(r), n(r), v(r), s("the"), n(r), s(".")],
            1 => vec![
                s("in"),
                s("the"),
                n(r),
                s(","),
                s("the"),
                n(r),
                s("was"),
                a(r),
                s("."),
            ],
            2 => vec![
                s("it"),
                v(r),
                s("a"),
                a(r),
                n(r),
                s("for"),
                s("the"),
                n(r),
                s("."),
            ],
            3 => vec![
                s("the"),
                n(r),
                s("of"),
                s("the"),
                n(r),
                s("is"),
                a(r),
                s("."),
            ],
            _ => vec![
                s("this"),
                n(r),
                s("also"),
                v(r),
                s("an"),
                a(r),
                n(r),
                s("."),
            ],
        }
    }

    /// Returns the article, its true tags, and a KB row for non-entity
    /// topics.
    #[allow(clippy::type_complexity)]
    fn article(&mut self, id: usize) -> (Article, LabeledCorpus, Option<(String, Vec<String>)>) {
        let entity_topic = self.rng.gen_bool(0.6);
        let (title, topic, kb_row) = if entity_topic {
            let i = self.rng.gen_range(0..self.entities.len());
            (self.entities[i].title.clone(), Some(i), None)
        } else {
            let noun = NOUNS.choose(&mut self.rng).unwrap();
            let adj = ADJECTIVES.choose(&mut self.rng).unwrap();
            let title = format!("{adj} {noun} {id}");
            (
                title.clone(),
                None,
                Some((title, vec!["/common/topic".to_string()])),
            )
        };

        let mut sentences: Vec<Vec<String>> = Vec::new();
        let mut truth: Vec<Vec<Tag>> = Vec::new();
        let mut links = Vec::new();
        // entities already mentioned in this article, and whether linked
        let mut seen: HashMap<usize, bool> = HashMap::new();
        let mut related: Vec<usize> = Vec::new();
        let n_related = self.rng.gen_range(2..=4);
        let templates = templates();

        let n_entity_sentences = self.rng.gen_range(4..=7);
        let n_filler = self.rng.gen_range(self.cfg.filler_sentences.clone());
        let mut kinds: Vec<bool> = std::iter::repeat_n(true, n_entity_sentences)
            .chain(std::iter::repeat_n(false, n_filler))
            .collect();
        kinds.shuffle(&mut self.rng);
        // open with an entity sentence, as encyclopedia leads do
        if let Some(pos) = kinds.iter().position(|k| *k) {
            kinds.swap(0, pos);
        }

        for (sidx, is_entity) in kinds.into_iter().enumerate() {
            if !is_entity {
                let s = self.filler();
                truth.push(vec![Tag::NonEntity; s.len()]);
                sentences.push(s);
                continue;
            }
            let (slots, pieces) = match topic {
                Some(t) => {
                    let want = self.entities[t].tag;
                    let fitting: Vec<_> = templates
                        .iter()
                        .filter(|(s, _)| s.contains(&want))
                        .collect();
                    *fitting.choose(&mut self.rng).unwrap()
                }
                None => templates.choose(&mut self.rng).unwrap(),
            };
            // fill slots: the topic takes its slot when it fits (half the
            // time), other slots draw from the related set
            let mut fill: Vec<usize> = Vec::with_capacity(slots.len());
            let mut topic_used = false;
            for &tag in slots {
                let use_topic = !topic_used
                    && topic.is_some_and(|t| self.entities[t].tag == tag)
                    && (sidx == 0 || self.rng.gen_bool(0.5));
                let e = if use_topic {
                    topic_used = true;
                    topic.unwrap()
                } else {
                    let mut avoid = fill.clone();
                    avoid.extend(topic);
                    let candidates: Vec<usize> = related
                        .iter()
                        .copied()
                        .filter(|&r| self.entities[r].tag == tag && !avoid.contains(&r))
                        .collect();
                    if !candidates.is_empty()
                        && (related.len() >= n_related || self.rng.gen_bool(0.5))
                    {
                        *candidates.choose(&mut self.rng).unwrap()
                    } else {
                        let e = self.pick_entity(tag, &avoid);
                        if !related.contains(&e) {
                            related.push(e);
                        }
                        e
                    }
                };
                fill.push(e);
            }

            let mut tokens = Vec::new();
            let mut tags = Vec::new();
            for piece in pieces {
                match piece {
                    Piece::Word(w) => {
                        tokens.push(w.to_string());
                        tags.push(Tag::NonEntity);
                    }
                    Piece::Entity(k) => {
                        let e = fill[*k];
                        let ent = &self.entities[e];
                        let first_mention = !seen.contains_key(&e);
                        let form = if first_mention || self.rng.gen_bool(0.3) {
                            &ent.tokens
                        } else {
                            &ent.short
                        };
                        let start = tokens.len();
                        tokens.extend(form.iter().cloned());
                        tags.extend(std::iter::repeat_n(ent.tag, form.len()));
                        if first_mention {
                            let linked = Some(e) != topic && self.rng.gen_bool(self.cfg.link_prob);
                            seen.insert(e, linked);
                            if linked {
                                let target = match self.alias_of.get(&ent.title) {
                                    Some(alias) if self.rng.gen_bool(0.3) => alias.clone(),
                                    _ => ent.title.clone(),
                                };
                                links.push(Link::new(sidx, start, tokens.len(), target));
                            }
                        }
                    }
                }
            }
            sentences.push(tokens);
            truth.push(tags);
        }

        let article = Article {
            id: format!("syn{id:04}"),
            title,
            sentences: sentences.clone(),
            links,
        };
        let truth = LabeledCorpus::new(sentences, truth).expect("aligned");
        (article, truth, kb_row)
    }
}

//! Stage runners behind the `linkner` command line: extract → train → tag →
//! eval, plus dataset dumps and distant evaluation.
//!
//! Configuration is layered. Defaults are overridden by a TOML config file,
//! which is overridden by command-line flags; each layer is a
//! [`ConfigLayer`] with every field optional.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::conll;
use crate::corpus::{label_from_links, read_articles, surface_match, ExclusionList, LabeledCorpus};
use crate::dataset::{Dataset, DEFAULT_RHO, DEFAULT_WINDOW};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::eval::{distant_errors, exact_f1, DistantErrorReport, F1Report};
use crate::kb::{CategoryRuleSet, TitleIndex};
use crate::model::{decode_spans, Model};
use crate::train::{train, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub embeddings: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub redirects: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    /// Labeled CoNLL corpus: written by `extract`, read by `build`/`train`.
    pub labeled: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub rho: f64,
    pub window: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub exclude_top: usize,
    pub seed: Option<u64>,
    /// Expected embedding dimension; checked when set.
    pub dim: Option<usize>,
    pub init_scale: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub surface_match: bool,
    pub oversample: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        PipelineConfig {
            embeddings: None,
            kb: None,
            redirects: None,
            corpus: None,
            labeled: None,
            dataset: None,
            model: None,
            rho: DEFAULT_RHO,
            window: DEFAULT_WINDOW,
            hidden: t.hidden,
            epochs: t.epochs,
            exclude_top: ExclusionList::DEFAULT_SIZE,
            seed: None,
            dim: None,
            init_scale: t.init_scale,
            epsilon: t.epsilon,
            batch_size: t.batch_size,
            surface_match: true,
            oversample: true,
        }
    }
}

/// One layer of overrides.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigLayer {
    pub embeddings: Option<PathBuf>,
    pub kb: Option<PathBuf>,
    pub redirects: Option<PathBuf>,
    pub corpus: Option<PathBuf>,
    pub labeled: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub rho: Option<f64>,
    pub window: Option<usize>,
    pub hidden: Option<usize>,
    pub epochs: Option<usize>,
    pub exclude_top: Option<usize>,
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub init_scale: Option<f64>,
    pub epsilon: Option<f64>,
    pub batch_size: Option<usize>,
    pub surface_match: Option<bool>,
    pub oversample: Option<bool>,
}

impl ConfigLayer {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse(origin, 0, e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, &path.display().to_string())
    }
}

impl PipelineConfig {
    pub fn apply(mut self, layer: &ConfigLayer) -> Self {
        macro_rules! over {
            ($($f:ident),*) => { $( if let Some(v) = &layer.$f { self.$f = v.clone(); } )* };
        }
        macro_rules! over_opt {
            ($($f:ident),*) => { $( if layer.$f.is_some() { self.$f = layer.$f.clone(); } )* };
        }
        over_opt!(embeddings, kb, redirects, corpus, labeled, dataset, model, seed, dim);
        over!(
            rho,
            window,
            hidden,
            epochs,
            exclude_top,
            init_scale,
            epsilon,
            batch_size,
            surface_match,
            oversample
        );
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::invalid(format!("rho {} outside (0, 1)", self.rho)));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.hidden == 0 || self.batch_size == 0 || self.exclude_top == 0 {
            return Err(Error::invalid(
                "hidden, batch-size and exclude-top must be positive",
            ));
        }
        Ok(())
    }

    /// The fully resolved configuration, as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            hidden: self.hidden,
            epochs: self.epochs,
            seed: self.require_seed("train")?,
            init_scale: self.init_scale,
            epsilon: self.epsilon,
            batch_size: self.batch_size,
        })
    }

    fn require_seed(&self, stage: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::invalid(format!("{stage} needs --seed")))
    }

    fn path<'a>(&self, p: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        p.as_deref()
            .ok_or_else(|| Error::invalid(format!("missing --{flag}")))
    }

    fn load_embeddings(&self) -> Result<EmbeddingTable> {
        let table = EmbeddingTable::load(self.path(&self.embeddings, "embeddings")?)?;
        if let Some(d) = self.dim {
            if d != table.dim() {
                return Err(Error::invalid(format!(
                    "embeddings have dimension {}, configuration says {d}",
                    table.dim()
                )));
            }
        }
        Ok(table)
    }

    fn load_labeled(&self) -> Result<LabeledCorpus> {
        let docs = conll::read(self.path(&self.labeled, "labeled")?)?;
        Ok(docs.iter().map(conll::Document::to_labeled).collect())
    }
}

#[derive(Debug, Clone)]
pub struct ExtractReport {
    pub articles: usize,
    pub tokens: usize,
    pub entity_tokens: usize,
    pub coverage: f64,
    /// Entity tokens from links alone, before surface matching.
    pub link_entity_tokens: usize,
}

/// Labels the article corpus from links (plus surface matching when enabled)
/// and writes the CoNLL result to `config.labeled`.
pub fn extract(config: &PipelineConfig) -> Result<ExtractReport> {
    config.validate()?;
    let articles = read_articles(config.path(&config.corpus, "corpus")?)?;
    if articles.is_empty() {
        return Err(Error::invalid("corpus has no articles"));
    }
    let index = TitleIndex::load(
        config.path(&config.kb, "kb")?,
        config.redirects.as_deref(),
        &CategoryRuleSet::default(),
    )?;
    let exclusion = if config.surface_match {
        ExclusionList::from_table(&config.load_embeddings()?, config.exclude_top)?
    } else {
        ExclusionList::default()
    };

    let mut docs = Vec::with_capacity(articles.len());
    let mut link_entity_tokens = 0;
    for article in &articles {
        let mut labeled = label_from_links(article, &index)?;
        link_entity_tokens += labeled.entity_token_count();
        if config.surface_match {
            let cat = index.resolve(&article.title);
            labeled = surface_match(&labeled, &article.title, cat, &exclusion);
        }
        docs.push(labeled);
    }
    let text = conll::format_labeled(
        articles
            .iter()
            .zip(&docs)
            .map(|(a, l)| (Some(a.id.as_str()), l)),
    );
    let out = config.path(&config.labeled, "labeled")?;
    fs::write(out, text).map_err(|e| Error::io(out, e))?;

    let all: LabeledCorpus = docs.into_iter().collect();
    let coverage = all.phrase_coverage()?;
    Ok(ExtractReport {
        articles: articles.len(),
        tokens: all.token_count(),
        entity_tokens: all.entity_token_count(),
        coverage,
        link_entity_tokens,
    })
}

/// Window examples of the labeled corpus, oversampled when enabled.
pub fn build_dataset(config: &PipelineConfig) -> Result<Dataset> {
    config.validate()?;
    let table = config.load_embeddings()?;
    let labeled = config.load_labeled()?;
    let ds = Dataset::build(&labeled, &table, config.window);
    info!("{} examples, natural rho {:.4}", ds.len(), ds.rho());
    if !config.oversample {
        return Ok(ds);
    }
    let seed = config.require_seed("oversampling")?;
    let ds = ds.oversample(config.rho, seed)?;
    info!("oversampled to {} examples, rho {:.4}", ds.len(), ds.rho());
    Ok(ds)
}

/// `build`: writes the (debug-format) dataset to `config.dataset`.
pub fn build(config: &PipelineConfig) -> Result<Dataset> {
    let ds = build_dataset(config)?;
    ds.save(config.path(&config.dataset, "dataset")?)?;
    Ok(ds)
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub examples: usize,
    pub rho: f64,
    pub epoch_losses: Vec<f64>,
}

/// Builds the dataset, trains, and writes the model to `config.model`.
pub fn train_model(config: &PipelineConfig) -> Result<(Model, TrainReport)> {
    let cfg = config.train_config()?;
    let ds = build_dataset(config)?;
    let trained = train(&ds, &cfg)?;
    trained.model.save(config.path(&config.model, "model")?)?;
    Ok((
        trained.model,
        TrainReport {
            examples: ds.len(),
            rho: ds.rho(),
            epoch_losses: trained.epoch_losses,
        },
    ))
}

/// Tags a token-per-line file (extra columns ignored) and returns the IOB2
/// output text. Token order and sentence breaks are preserved.
pub fn tag_text(
    model: &Model,
    table: &EmbeddingTable,
    input: &str,
    origin: &str,
) -> Result<String> {
    let docs = conll::parse(input, origin)?;
    let mut out = String::new();
    for doc in &docs {
        if let Some(id) = &doc.id {
            out.push_str(&format!("# article {id}\n"));
        }
        let sentences: Vec<&Vec<String>> = doc.sentences.iter().map(|s| &s.tokens).collect();
        let owned: Vec<Vec<&str>> = sentences
            .iter()
            .map(|s| s.iter().map(String::as_str).collect())
            .collect();
        let tags = model.predict_tags(&owned, table)?;
        for (tokens, tags) in sentences.iter().zip(&tags) {
            let spans = decode_spans(0, tags);
            conll::write_sentence(&mut out, tokens, &conll::spans_to_iob(tokens.len(), &spans));
        }
    }
    Ok(out)
}

pub fn tag_file(config: &PipelineConfig, input: &Path, output: &Path) -> Result<()> {
    let model = Model::load(config.path(&config.model, "model")?)?;
    let table = config.load_embeddings()?;
    if table.dim() != model.dim() {
        return Err(Error::invalid(format!(
            "model expects dimension {}, embeddings have {}",
            model.dim(),
            table.dim()
        )));
    }
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let out = tag_text(&model, &table, &text, &input.display().to_string())?;
    fs::write(output, out).map_err(|e| Error::io(output, e))
}

/// Exact F1 of `pred` against `gold`. Both files must hold the same tokens
/// in the same sentences.
pub fn eval_files(gold: &Path, pred: &Path) -> Result<F1Report> {
    let gold_docs = conll::read(gold)?;
    let pred_docs = conll::read(pred)?;
    let g = conll::flatten(&gold_docs);
    let p = conll::flatten(&pred_docs);
    for (i, (a, b)) in g.iter().zip(&p).enumerate() {
        if a.tokens != b.tokens {
            return Err(Error::Alignment {
                index: i,
                msg: "gold and predicted tokens differ".into(),
            });
        }
    }
    if g.len() != p.len() {
        return Err(Error::Alignment {
            index: g.len().min(p.len()),
            msg: format!("gold has {} sentences, predictions {}", g.len(), p.len()),
        });
    }
    let gold_spans: Vec<_> = conll::spans(&gold_docs).into_iter().flatten().collect();
    let pred_spans: Vec<_> = conll::spans(&pred_docs).into_iter().flatten().collect();
    Ok(exact_f1(&gold_spans, &pred_spans))
}

/// Distant evaluation between two sentence-aligned annotation files.
pub fn distant_files(source: &Path, target: &Path) -> Result<DistantErrorReport> {
    let s = conll::spans(&conll::read(source)?);
    let t = conll::spans(&conll::read(target)?);
    distant_errors(&s, &t)
}

//! Named-entity taggers from link-annotated articles.
//!
//! The pipeline turns an article corpus whose internal links point at
//! knowledge-base entries into word-level training data, trains a window
//! classifier over pretrained embeddings, and evaluates it either against
//! gold annotations (exact-match F1) or by comparing entity counts across
//! aligned sentence pairs (distant evaluation).
//!
//! | stage | module |
//! |-------|--------|
//! | embeddings file, lookup | [`embeddings`] |
//! | title → category via attributes and redirects | [`kb`] |
//! | link labeling, surface matching, coverage | [`corpus`] |
//! | window examples, oversampling | [`dataset`] |
//! | scorer, hinge loss, gradients, span decoding | [`model`] |
//! | AdaGrad training loop | [`train`] |
//! | exact F1, distant errors | [`eval`] |
//! | CoNLL reading/writing | [`conll`] |
//! | command-line stages | [`pipeline`] |
//!
//! [`synth`] generates a small synthetic world for the examples and tests;
//! [`tokenize`] is a reference tokenizer for raw text.

pub mod conll;
pub mod corpus;
pub mod dataset;
pub mod embeddings;
mod error;
pub mod eval;
pub mod kb;
pub mod model;
pub mod pipeline;
pub mod synth;
mod tag;
pub mod tokenize;
pub mod train;

pub use corpus::{Article, ExclusionList, LabeledCorpus, Link};
pub use dataset::{Dataset, WindowExample};
pub use embeddings::EmbeddingTable;
pub use error::{Error, Result};
pub use eval::{EntitySpan, F1Report};
pub use kb::{CategoryRuleSet, TitleIndex};
pub use model::Model;
pub use tag::Tag;
pub use train::{train, TrainConfig};

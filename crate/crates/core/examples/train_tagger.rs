//! Training a window tagger in memory and tagging new sentences.
//!
//! ```text
//! RUST_LOG=info cargo run --release --example train_tagger
//! ```

use linkner::corpus::{label_from_links, surface_match};
use linkner::model::decode_spans;
use linkner::synth::{SynthConfig, SyntheticCorpus};
use linkner::{train, Dataset, ExclusionList, LabeledCorpus, TrainConfig};

fn main() -> linkner::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let world = SyntheticCorpus::generate(&SynthConfig::default());
    let index = world.title_index();
    let exclusion = ExclusionList::from_table(&world.embeddings, world.function_words)?;
    let labeled: LabeledCorpus = world
        .train
        .iter()
        .map(|a| {
            let l = label_from_links(a, &index)?;
            Ok(surface_match(
                &l,
                &a.title,
                index.resolve(&a.title),
                &exclusion,
            ))
        })
        .collect::<linkner::Result<Vec<_>>>()?
        .into_iter()
        .collect();

    let ds = Dataset::build(&labeled, &world.embeddings, 2).oversample(0.5, 7)?;
    let cfg = TrainConfig {
        hidden: 32,
        seed: 7,
        ..TrainConfig::default()
    };
    let trained = train(&ds, &cfg)?;
    println!(
        "{} examples, loss {:.4} -> {:.4}",
        ds.len(),
        trained.epoch_losses[0],
        trained.epoch_losses.last().unwrap()
    );

    let sentences: Vec<Vec<&str>> = world.test[0]
        .sentences
        .iter()
        .take(8)
        .map(|s| s.iter().map(String::as_str).collect())
        .collect();
    let tags = trained.model.predict_tags(&sentences, &world.embeddings)?;
    for (i, (tokens, tags)) in sentences.iter().zip(&tags).enumerate() {
        let spans: Vec<String> = decode_spans(i, tags)
            .iter()
            .map(|s| {
                format!(
                    "[{} {}]",
                    tokens[s.start..s.end].join(" "),
                    s.category.short()
                )
            })
            .collect();
        println!("{}\n    {}", tokens.join(" "), spans.join(" "));
    }
    Ok(())
}

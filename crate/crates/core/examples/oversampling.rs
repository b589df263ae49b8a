//! Window features and positive-ratio oversampling on a synthetic corpus.

use linkner::corpus::{label_from_links, surface_match};
use linkner::synth::{SynthConfig, SyntheticCorpus};
use linkner::{Dataset, ExclusionList, LabeledCorpus, Tag};

fn main() -> linkner::Result<()> {
    let world = SyntheticCorpus::generate(&SynthConfig {
        articles: 60,
        ..SynthConfig::default()
    });
    let index = world.title_index();
    let exclusion = ExclusionList::from_table(&world.embeddings, world.function_words)?;
    let mut labeled = LabeledCorpus::default();
    for article in &world.train {
        let l = label_from_links(article, &index)?;
        labeled.extend(surface_match(
            &l,
            &article.title,
            index.resolve(&article.title),
            &exclusion,
        ));
    }

    let ds = Dataset::build(&labeled, &world.embeddings, 2);
    println!(
        "{} windows of width {}, natural rho {:.4}",
        ds.len(),
        ds.feature_len(),
        ds.rho()
    );
    for rho in [0.1, 0.25, 0.5, 0.75] {
        let over = ds.oversample(rho, 42)?;
        let counts = over.tag_counts();
        println!(
            "target {rho:<4} -> {:>5} examples, rho {:.4}, O {:>5} PER {:>4} LOC {:>4} ORG {:>4}",
            over.len(),
            over.rho(),
            counts[Tag::NonEntity.index()],
            counts[Tag::Person.index()],
            counts[Tag::Location.index()],
            counts[Tag::Organization.index()],
        );
    }
    Ok(())
}

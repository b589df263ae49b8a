//! Comparing two annotators without gold data: per-category omission and
//! addition rates over a seeded sample of sentences.

use linkner::corpus::label_from_links;
use linkner::eval::{distant_errors, select_eval_sentences};
use linkner::model::decode_spans;
use linkner::synth::{SynthConfig, SyntheticCorpus};

fn main() -> linkner::Result<()> {
    let world = SyntheticCorpus::generate(&SynthConfig {
        articles: 50,
        ..SynthConfig::default()
    });
    let index = world.title_index();

    // source: true tags; target: what the links alone give
    let mut source = Vec::new();
    let mut target = Vec::new();
    for (article, truth) in world.train.iter().zip(&world.train_truth) {
        let links = label_from_links(article, &index)?;
        for (t, l) in truth.tags().iter().zip(links.tags()) {
            source.push(decode_spans(source.len(), t));
            target.push(decode_spans(target.len(), l));
        }
    }

    let picked = select_eval_sentences(&source, 200, 2014)?;
    let src: Vec<_> = picked.iter().map(|&i| source[i].clone()).collect();
    let tgt: Vec<_> = picked.iter().map(|&i| target[i].clone()).collect();
    println!("{} sentences sampled from {}", picked.len(), source.len());
    print!("{}", distant_errors(&src, &tgt)?.to_tsv());
    Ok(())
}

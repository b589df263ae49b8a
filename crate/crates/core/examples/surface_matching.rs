//! Labeling one article from its links, then propagating labels to unlinked
//! mentions of the same words.

use linkner::corpus::{label_from_links, surface_match};
use linkner::tokenize::tokenize;
use linkner::{Article, ExclusionList, Link, Tag, TitleIndex};

fn show(label: &str, corpus: &linkner::LabeledCorpus) {
    println!("{label}:");
    for (tokens, tags) in corpus.iter() {
        let line: Vec<String> = tokens
            .iter()
            .zip(tags)
            .map(|(w, t)| {
                if t.is_entity() {
                    format!("{w}/{}", t.short())
                } else {
                    w.clone()
                }
            })
            .collect();
        println!("  {}", line.join(" "));
    }
}

fn main() -> linkner::Result<()> {
    let article = Article {
        id: "534366".into(),
        title: "Barack Obama".into(),
        sentences: vec![
            tokenize("Barack Obama was born in Honolulu, Hawaii."),
            tokenize("Obama graduated from Columbia University."),
            tokenize("In Honolulu, Barack attended school."),
        ],
        links: vec![
            Link::new(0, 5, 6, "Honolulu"),
            Link::new(0, 7, 8, "Hawaii"),
            Link::new(1, 3, 5, "Columbia University"),
        ],
    };
    article.validate()?;
    let index = TitleIndex::build(
        [
            ("Barack Obama", Tag::Person),
            ("Honolulu", Tag::Location),
            ("Hawaii", Tag::Location),
            ("Columbia University", Tag::Organization),
        ],
        std::iter::empty::<(&str, &str)>(),
    )?;

    let links = label_from_links(&article, &index)?;
    show("links only", &links);

    let exclusion: ExclusionList = ["the", ",", ".", "in", "was", "from"].into_iter().collect();
    let matched = surface_match(
        &links,
        &article.title,
        index.resolve(&article.title),
        &exclusion,
    );
    show("with surface matching", &matched);
    println!(
        "entity tokens {} -> {}",
        links.entity_token_count(),
        matched.entity_token_count()
    );
    Ok(())
}

//! Mapping knowledge-base attributes to tags and resolving link targets
//! through redirects.

use linkner::{CategoryRuleSet, Tag, TitleIndex};

fn main() -> linkner::Result<()> {
    let rules = CategoryRuleSet::default();
    let kb = [
        (
            "Barack Obama",
            vec!["/people/person", "/government/politician"],
        ),
        ("Honolulu", vec!["/location/citytown"]),
        (
            "The New York Times",
            vec!["/book/newspaper", "/organization/organization"],
        ),
        // both PERSON and LOCATION attributes: PERSON wins
        ("Washington", vec!["/location/citytown", "/people/person"]),
        ("Jazz", vec!["/music/genre"]),
    ];
    for (title, attrs) in &kb {
        println!("{title:<20} {}", rules.categorize(attrs));
    }

    let index = TitleIndex::build(
        kb.iter().map(|(t, a)| (*t, rules.categorize(a))),
        [
            ("Obama", "Barack Obama"),
            ("President Obama", "Obama"),
            ("NYT", "The New York Times"),
        ],
    )?;
    for target in [
        "Obama",
        "President_Obama",
        "NYT",
        "Barack  Obama",
        "Nowhere",
    ] {
        let tag = index.resolve(target);
        println!(
            "link [[{target}]] -> {tag}{}",
            if tag == Tag::NonEntity {
                " (unlabeled)"
            } else {
                ""
            }
        );
    }
    println!(
        "coverage of the link list: {:.2}",
        index.coverage(&["Obama", "NYT", "Nowhere", "Jazz"])?
    );
    Ok(())
}

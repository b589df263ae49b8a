//! Article categorization from knowledge-base attributes, and the
//! title/redirect index used to decide whether a link is an entity mention.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tag::Tag;

/// Ordered attribute rules. An article's category is the first category,
/// in `PERSON > LOCATION > ORGANIZATION` precedence, with any matching
/// attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryRuleSet {
    rules: Vec<(String, Tag)>,
}

impl CategoryRuleSet {
    pub fn new<I, S>(rules: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Tag)>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (pattern, tag) in rules {
            let pattern = pattern.as_ref().trim().to_string();
            if !tag.is_entity() {
                return Err(Error::invalid(format!(
                    "rule {pattern:?} maps to NONENTITY"
                )));
            }
            if !seen.insert(pattern.clone()) {
                return Err(Error::invalid(format!(
                    "duplicate attribute rule {pattern:?}"
                )));
            }
            out.push((pattern, tag));
        }
        Ok(CategoryRuleSet { rules: out })
    }

    pub fn rules(&self) -> &[(String, Tag)] {
        &self.rules
    }

    pub fn categorize<S: AsRef<str>>(&self, attributes: &[S]) -> Tag {
        let attrs: HashSet<&str> = attributes.iter().map(|a| a.as_ref().trim()).collect();
        Tag::ENTITIES
            .into_iter()
            .find(|&cat| {
                self.rules
                    .iter()
                    .any(|(p, t)| *t == cat && attrs.contains(p.as_str()))
            })
            .unwrap_or(Tag::NonEntity)
    }
}

impl Default for CategoryRuleSet {
    /// The Freebase attribute mapping, with `/location/*` expanded.
    fn default() -> Self {
        let location = [
            "citytown",
            "country",
            "region",
            "continent",
            "neighborhood",
            "administrative_division",
        ]
        .map(|s| (format!("/location/{s}"), Tag::Location));
        let rules = [("/people/person".to_string(), Tag::Person)]
            .into_iter()
            .chain(location)
            .chain([
                ("/sports/sports_team".to_string(), Tag::Organization),
                ("/book/newspaper".to_string(), Tag::Organization),
                ("/organization/organization".to_string(), Tag::Organization),
            ]);
        CategoryRuleSet::new(rules).expect("built-in rules are valid")
    }
}

/// Trims and collapses runs of spaces/underscores into one space.
pub fn normalize_title(title: &str) -> String {
    let mut out = String::with_capacity(title.len());
    let mut gap = false;
    for ch in title.trim().chars() {
        if ch == ' ' || ch == '_' || ch.is_whitespace() {
            gap = true;
        } else {
            if gap && !out.is_empty() {
                out.push(' ');
            }
            gap = false;
            out.push(ch);
        }
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct TitleIndex {
    canonical: HashMap<String, Tag>,
    redirects: HashMap<String, String>,
}

impl TitleIndex {
    /// Builds the index. Redirect chains are collapsed so every alias points
    /// at a title that is not itself an alias; cycles and aliases that are
    /// also canonical articles are rejected.
    pub fn build<I, J, A, B, C>(canonical: I, redirects: J) -> Result<Self>
    where
        I: IntoIterator<Item = (A, Tag)>,
        J: IntoIterator<Item = (B, C)>,
        A: AsRef<str>,
        B: AsRef<str>,
        C: AsRef<str>,
    {
        let canonical: HashMap<String, Tag> = canonical
            .into_iter()
            .map(|(t, c)| (normalize_title(t.as_ref()), c))
            .collect();
        let raw: HashMap<String, String> = redirects
            .into_iter()
            .map(|(a, b)| (normalize_title(a.as_ref()), normalize_title(b.as_ref())))
            .collect();

        let mut redirects = HashMap::with_capacity(raw.len());
        for alias in raw.keys() {
            if canonical.contains_key(alias) {
                return Err(Error::invalid(format!(
                    "title {alias:?} is both an article and a redirect"
                )));
            }
            let mut target = &raw[alias];
            let mut hops = 0;
            while let Some(next) = raw.get(target) {
                hops += 1;
                if hops > raw.len() {
                    return Err(Error::invalid(format!("redirect cycle through {alias:?}")));
                }
                target = next;
            }
            redirects.insert(alias.clone(), target.clone());
        }
        Ok(TitleIndex {
            canonical,
            redirects,
        })
    }

    /// Reads the KB TSV (`title<TAB>attr,attr,...`) and the redirects TSV
    /// (`alias<TAB>canonical`).
    pub fn load(
        kb: impl AsRef<Path>,
        redirects: Option<&Path>,
        rules: &CategoryRuleSet,
    ) -> Result<Self> {
        let kb = kb.as_ref();
        let text = fs::read_to_string(kb).map_err(|e| Error::io(kb, e))?;
        let articles = parse_kb(&text, &kb.display().to_string(), rules)?;
        let redirects = match redirects {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                parse_redirects(&text, &path.display().to_string())?
            }
            None => Vec::new(),
        };
        TitleIndex::build(articles, redirects)
    }

    pub fn resolve(&self, title: &str) -> Tag {
        let title = normalize_title(title);
        let key = self.redirects.get(&title).unwrap_or(&title);
        self.canonical.get(key).copied().unwrap_or(Tag::NonEntity)
    }

    pub fn redirects(&self) -> impl Iterator<Item = (&str, &str)> {
        self.redirects.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn titles(&self) -> impl Iterator<Item = (&str, Tag)> {
        self.canonical.iter().map(|(a, t)| (a.as_str(), *t))
    }

    /// Fraction of `titles` that resolve to an entity category.
    pub fn coverage<S: AsRef<str>>(&self, titles: &[S]) -> Result<f64> {
        if titles.is_empty() {
            return Err(Error::invalid("coverage of an empty title list"));
        }
        let hits = titles
            .iter()
            .filter(|t| self.resolve(t.as_ref()).is_entity())
            .count();
        Ok(hits as f64 / titles.len() as f64)
    }
}

pub fn parse_kb(text: &str, origin: &str, rules: &CategoryRuleSet) -> Result<Vec<(String, Tag)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (title, attrs) = line.split_once('\t').unwrap_or((line, ""));
        if title.trim().is_empty() {
            return Err(Error::parse(origin, i + 1, "empty title"));
        }
        let attrs: Vec<&str> = attrs.split(',').filter(|a| !a.trim().is_empty()).collect();
        out.push((title.to_string(), rules.categorize(&attrs)));
    }
    Ok(out)
}

pub fn parse_redirects(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match line.split_once('\t') {
            Some((a, b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                out.push((a.to_string(), b.to_string()))
            }
            _ => return Err(Error::parse(origin, i + 1, "expected alias<TAB>canonical")),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rules() {
        let r = CategoryRuleSet::default();
        assert_eq!(r.categorize(&["/people/person"]), Tag::Person);
        assert_eq!(r.categorize::<&str>(&[]), Tag::NonEntity);
        assert_eq!(r.categorize(&["/location/neighborhood"]), Tag::Location);
        assert_eq!(r.categorize(&["/book/newspaper"]), Tag::Organization);
        assert_eq!(r.categorize(&["/film/film"]), Tag::NonEntity);
        // no prefix wildcard
        assert_eq!(r.categorize(&["/location/planet"]), Tag::NonEntity);
        assert_eq!(r.rules().len(), 10);
    }

    #[test]
    fn precedence_location_over_org() {
        let r = CategoryRuleSet::default();
        assert_eq!(
            r.categorize(&["/location/citytown", "/organization/organization"]),
            Tag::Location
        );
        assert_eq!(
            r.categorize(&["/organization/organization", "/people/person"]),
            Tag::Person
        );
        assert_eq!(r.categorize(&[" /people/person "]), Tag::Person);
    }

    #[test]
    fn rule_validation() {
        assert!(CategoryRuleSet::new([("/a", Tag::Person), ("/a", Tag::Location)]).is_err());
        assert!(CategoryRuleSet::new([("/a", Tag::NonEntity)]).is_err());
    }

    #[test]
    fn title_normalization() {
        assert_eq!(normalize_title("  Barack__Obama "), "Barack Obama");
        assert_eq!(normalize_title("New_ _York"), "New York");
        assert_eq!(normalize_title("_x_"), "x");
    }

    fn index() -> TitleIndex {
        TitleIndex::build(
            [
                ("Barack Obama", Tag::Person),
                ("Prague", Tag::Location),
                ("Cat", Tag::NonEntity),
            ],
            [
                ("Obama", "Barack_Obama"),
                ("B. Obama", "Obama"),
                ("Praha", "Prague"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn resolve() {
        let idx = index();
        assert_eq!(idx.resolve("Barack Obama"), Tag::Person);
        assert_eq!(idx.resolve("Barack_Obama"), Tag::Person);
        assert_eq!(idx.resolve("Obama"), Tag::Person);
        assert_eq!(idx.resolve("B. Obama"), Tag::Person);
        assert_eq!(idx.resolve("Nowhere"), Tag::NonEntity);
        assert_eq!(idx.resolve("Cat"), Tag::NonEntity);
        // chains collapse to one hop
        for (_, target) in idx.redirects() {
            assert!(idx.redirects().all(|(a, _)| a != target));
        }
    }

    #[test]
    fn redirect_errors() {
        assert!(TitleIndex::build([("A", Tag::Person)], [("A", "B")]).is_err());
        assert!(TitleIndex::build([("A", Tag::Person)], [("X", "Y"), ("Y", "X")]).is_err());
    }

    #[test]
    fn coverage() {
        let idx = index();
        assert_eq!(
            idx.coverage(&["Barack Obama", "Cat", "Praha", "Dog"])
                .unwrap(),
            0.5
        );
        assert_eq!(idx.coverage(&["Cat", "Dog"]).unwrap(), 0.0);
        assert!(idx.coverage::<&str>(&[]).is_err());
    }

    #[test]
    fn parse_files() {
        let rules = CategoryRuleSet::default();
        let kb = parse_kb(
            "Barack Obama\t/people/person,/award/winner\nCat\t\nPrague\t/location/citytown\n",
            "kb",
            &rules,
        )
        .unwrap();
        assert_eq!(kb[0].1, Tag::Person);
        assert_eq!(kb[1].1, Tag::NonEntity);
        assert_eq!(kb[2].1, Tag::Location);
        assert!(parse_redirects("Obama\n", "r").is_err());
    }

    proptest::proptest! {
        #[test]
        fn categorize_permutation_invariant(
            attrs in proptest::sample::subsequence(vec![
                "/people/person", "/location/country", "/book/newspaper",
                "/film/film", "/location/region", "/sports/sports_team",
            ], 0..6),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let rules = CategoryRuleSet::default();
            let mut shuffled = attrs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            proptest::prop_assert_eq!(rules.categorize(&attrs), rules.categorize(&shuffled));
        }
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Word-level category. The discriminant order is the fixed tie order used
/// by prediction: `NonEntity` first, then `Person`, `Location`, `Organization`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tag {
    NonEntity = 0,
    Person = 1,
    Location = 2,
    Organization = 3,
}

impl Tag {
    pub const COUNT: usize = 4;

    pub const ALL: [Tag; 4] = [
        Tag::NonEntity,
        Tag::Person,
        Tag::Location,
        Tag::Organization,
    ];

    /// The positive categories, in precedence order.
    pub const ENTITIES: [Tag; 3] = [Tag::Person, Tag::Location, Tag::Organization];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Option<Tag> {
        Tag::ALL.get(i).copied()
    }

    #[inline]
    pub fn is_entity(self) -> bool {
        self != Tag::NonEntity
    }

    /// Short label used in CoNLL files (`PER`, `LOC`, `ORG`, `O`).
    pub fn short(self) -> &'static str {
        match self {
            Tag::NonEntity => "O",
            Tag::Person => "PER",
            Tag::Location => "LOC",
            Tag::Organization => "ORG",
        }
    }

    pub fn long(self) -> &'static str {
        match self {
            Tag::NonEntity => "NONENTITY",
            Tag::Person => "PERSON",
            Tag::Location => "LOCATION",
            Tag::Organization => "ORGANIZATION",
        }
    }

    /// Parses a bare category label. Unknown entity types (e.g. `MISC`)
    /// return `None`.
    pub fn from_label(label: &str) -> Option<Tag> {
        match label.to_ascii_uppercase().as_str() {
            "O" | "NONENTITY" | "NE" => Some(Tag::NonEntity),
            "PER" | "PERSON" => Some(Tag::Person),
            "LOC" | "LOCATION" => Some(Tag::Location),
            "ORG" | "ORGANIZATION" => Some(Tag::Organization),
            _ => None,
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.long())
    }
}

impl FromStr for Tag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::from_label(s).ok_or_else(|| Error::invalid(format!("unknown tag {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        for t in Tag::ALL {
            assert_eq!(Tag::from_index(t.index()), Some(t));
        }
        assert_eq!(Tag::from_index(4), None);
    }

    #[test]
    fn labels() {
        assert_eq!(Tag::from_label("per"), Some(Tag::Person));
        assert_eq!(Tag::from_label("LOCATION"), Some(Tag::Location));
        assert_eq!(Tag::from_label("MISC"), None);
        assert!("bogus".parse::<Tag>().is_err());
    }
}

//! Tag typology registries for the two annotation families.
//!
//! The named-entity registry covers the eight top-level types with their
//! attested subtypes; the designating-entity registry is a closed set of
//! person roles and attribute types. Both accept explicit extensions via
//! configuration, never implicitly.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Which annotation family a tag belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TagFamily {
    Ne,
    De,
}

impl TagFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            TagFamily::Ne => "NE",
            TagFamily::De => "DE",
        }
    }

    pub fn parse(s: &str) -> Option<TagFamily> {
        match s {
            "NE" => Some(TagFamily::Ne),
            "DE" => Some(TagFamily::De),
            _ => None,
        }
    }
}

impl fmt::Display for TagFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Top-level named-entity types.
pub const NE_FAMILIES: [&str; 8] = [
    "pers", "fonc", "org", "loc", "prod", "time", "amount", "event",
];

/// Subtypes attested in the source material. The full subtype inventory of
/// the original system is not recoverable; anything else is user extension.
pub const NE_SUBTYPES: [&str; 5] = [
    "pers.hum",
    "fonc.pol",
    "loc.fac",
    "loc.admi",
    "time.date.rel",
];

/// Designating-entity person roles.
pub const DE_PERSON_ROLES: [&str; 4] = ["pers.speaker", "pers.spouse", "pers.child", "pers.parent"];

/// Designating-entity attribute types.
pub const DE_ATTRIBUTES: [&str; 9] = [
    "identity.age",
    "identity.birth",
    "identity.origin",
    "identity.arrival",
    "identity.children",
    "work.occupation",
    "work.field",
    "work.location",
    "work.business",
];

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum TypologyError {
    #[error("unknown {family} type {type_string:?}")]
    UnknownType {
        family: TagFamily,
        type_string: String,
    },
    #[error("{family} subtype {type_string:?} has no registered parent {parent:?}")]
    MissingParent {
        family: TagFamily,
        type_string: String,
        parent: String,
    },
    #[error("empty type string")]
    Empty,
}

/// The closed registry of valid tag type strings for both families.
#[derive(Debug, Clone)]
pub struct Typology {
    ne: BTreeSet<String>,
    de: BTreeSet<String>,
}

impl Default for Typology {
    fn default() -> Self {
        Typology::builtin()
    }
}

impl Typology {
    /// Registry holding the eight NE families, the attested NE subtypes and
    /// the closed DE set.
    pub fn builtin() -> Typology {
        let mut ne = BTreeSet::new();
        for family in NE_FAMILIES {
            ne.insert(family.to_owned());
        }
        for sub in NE_SUBTYPES {
            ne.insert(sub.to_owned());
        }
        let mut de = BTreeSet::new();
        for role in DE_PERSON_ROLES {
            de.insert(role.to_owned());
        }
        for attr in DE_ATTRIBUTES {
            de.insert(attr.to_owned());
        }
        // Bare DE groups are not valid tags on their own; the registry keeps
        // only the enumerated role and attribute strings.
        Typology { ne, de }
    }

    /// Register an extension type. NE extensions must descend from a known
    /// parent; DE extensions must dot-extend one of the closed groups
    /// (`pers`, `identity`, `work`).
    pub fn extend(&mut self, family: TagFamily, type_string: &str) -> Result<(), TypologyError> {
        if type_string.is_empty() {
            return Err(TypologyError::Empty);
        }
        match family {
            TagFamily::Ne => {
                if let Some(parent) = parent_of(type_string) {
                    if !self.ne.contains(parent) {
                        return Err(TypologyError::MissingParent {
                            family,
                            type_string: type_string.to_owned(),
                            parent: parent.to_owned(),
                        });
                    }
                } else if !NE_FAMILIES.contains(&type_string) {
                    // New top-level NE families are not extensible.
                    return Err(TypologyError::UnknownType {
                        family,
                        type_string: type_string.to_owned(),
                    });
                }
                self.ne.insert(type_string.to_owned());
                Ok(())
            }
            TagFamily::De => {
                let group = type_string.split('.').next().unwrap_or("");
                if !matches!(group, "pers" | "identity" | "work") || parent_of(type_string).is_none()
                {
                    return Err(TypologyError::UnknownType {
                        family,
                        type_string: type_string.to_owned(),
                    });
                }
                self.de.insert(type_string.to_owned());
                Ok(())
            }
        }
    }

    pub fn validate(&self, family: TagFamily, type_string: &str) -> Result<(), TypologyError> {
        if type_string.is_empty() {
            return Err(TypologyError::Empty);
        }
        let known = match family {
            TagFamily::Ne => self.ne.contains(type_string),
            TagFamily::De => self.de.contains(type_string),
        };
        if known {
            Ok(())
        } else {
            Err(TypologyError::UnknownType {
                family,
                type_string: type_string.to_owned(),
            })
        }
    }

    pub fn is_valid(&self, family: TagFamily, type_string: &str) -> bool {
        self.validate(family, type_string).is_ok()
    }

    pub fn ne_types(&self) -> impl Iterator<Item = &str> {
        self.ne.iter().map(String::as_str)
    }

    pub fn de_types(&self) -> impl Iterator<Item = &str> {
        self.de.iter().map(String::as_str)
    }

    /// Nesting rule for annotation pairs in a direct containment relation.
    ///
    /// DE person roles may contain attribute tags and other person roles;
    /// attribute tags may contain NE tags only. NE containment is
    /// unrestricted within the NE family.
    pub fn nesting_allowed(
        &self,
        outer: (TagFamily, &str),
        inner: (TagFamily, &str),
    ) -> bool {
        match (outer.0, inner.0) {
            (TagFamily::Ne, TagFamily::Ne) => true,
            // An NE span is an opaque unit; nothing nests inside it.
            (TagFamily::Ne, TagFamily::De) => false,
            (TagFamily::De, inner_family) => {
                if is_de_person_role(outer.1) {
                    inner_family == TagFamily::De
                } else {
                    // Attribute tags contain NE tags only; in particular they
                    // never contain person roles.
                    inner_family == TagFamily::Ne
                }
            }
        }
    }
}

/// Whether a DE type string is a person role (as opposed to an attribute).
pub fn is_de_person_role(type_string: &str) -> bool {
    type_string.starts_with("pers.") || type_string == "pers"
}

fn parent_of(type_string: &str) -> Option<&str> {
    type_string.rfind('.').map(|idx| &type_string[..idx])
}

/// The named-entity registry alone (the eight families plus attested
/// subtypes), for callers that only deal in NEs.
pub fn ne_typology() -> Typology {
    Typology::builtin()
}

/// The designating-entity registry. Shares the combined registry type so
/// nesting checks can see both families.
pub fn de_typology() -> Typology {
    Typology::builtin()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attested_types_validate() {
        let t = Typology::builtin();
        assert!(t.is_valid(TagFamily::Ne, "loc.admi"));
        assert!(t.is_valid(TagFamily::Ne, "loc"));
        assert!(t.is_valid(TagFamily::Ne, "pers.hum"));
        assert!(t.is_valid(TagFamily::Ne, "time.date.rel"));
        assert!(t.is_valid(TagFamily::De, "identity.origin"));
        assert!(t.is_valid(TagFamily::De, "work.field"));
        assert!(t.is_valid(TagFamily::De, "pers.speaker"));
    }

    #[test]
    fn unknown_subtype_rejected_until_configured() {
        let mut t = Typology::builtin();
        assert!(!t.is_valid(TagFamily::Ne, "loc.unknown"));
        t.extend(TagFamily::Ne, "loc.unknown").unwrap();
        assert!(t.is_valid(TagFamily::Ne, "loc.unknown"));
    }

    #[test]
    fn ne_extension_requires_known_parent() {
        let mut t = Typology::builtin();
        let err = t.extend(TagFamily::Ne, "widget.kind").unwrap_err();
        assert!(matches!(err, TypologyError::UnknownType { .. }));
        // Deep extension under an attested subtype is allowed.
        t.extend(TagFamily::Ne, "loc.admi.city").unwrap();
        assert!(t.is_valid(TagFamily::Ne, "loc.admi.city"));
    }

    #[test]
    fn de_registry_is_closed() {
        let t = Typology::builtin();
        assert!(!t.is_valid(TagFamily::De, "identity.hobby"));
        assert!(!t.is_valid(TagFamily::De, "pers"));
        let mut t = t;
        t.extend(TagFamily::De, "identity.hobby").unwrap();
        assert!(t.is_valid(TagFamily::De, "identity.hobby"));
        assert!(t.extend(TagFamily::De, "hobby.kind").is_err());
    }

    #[test]
    fn nesting_rules() {
        let t = Typology::builtin();
        // Person roles contain attributes and other roles.
        assert!(t.nesting_allowed((TagFamily::De, "pers.speaker"), (TagFamily::De, "identity.age")));
        assert!(t.nesting_allowed((TagFamily::De, "pers.speaker"), (TagFamily::De, "pers.parent")));
        // Attributes contain NE tags, never person roles.
        assert!(t.nesting_allowed((TagFamily::De, "identity.origin"), (TagFamily::Ne, "loc.admi")));
        assert!(!t.nesting_allowed((TagFamily::De, "identity.age"), (TagFamily::De, "pers.speaker")));
        assert!(!t.nesting_allowed((TagFamily::De, "work.field"), (TagFamily::De, "identity.age")));
        // The third worked structure: work.field inside pers.parent inside pers.speaker.
        assert!(t.nesting_allowed((TagFamily::De, "pers.parent"), (TagFamily::De, "work.field")));
    }
}

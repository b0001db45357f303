use crate::ingest::AuthorInstance;
use crate::text::ascii_fold;

/// Last name plus first initial, ASCII-folded and lowercased.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NameKey {
    pub last: String,
    pub initial: char,
}

fn squash(s: &str) -> String {
    ascii_fold(s).chars().filter(char::is_ascii_alphanumeric).collect()
}

pub fn name_key(last: &str, given: &str) -> Option<NameKey> {
    let last = squash(last);
    let initial = ascii_fold(given).chars().find(char::is_ascii_alphanumeric)?;
    (!last.is_empty()).then_some(NameKey { last, initial })
}

/// Uses `Initials` when present, otherwise the fore name. Collective
/// authors have no key.
pub fn author_name_key(a: &AuthorInstance) -> Option<NameKey> {
    let last = a.last_name.as_deref()?;
    let given = a
        .initials
        .as_deref()
        .filter(|s| !s.trim().is_empty())
        .or(a.fore_name.as_deref())?;
    name_key(last, given)
}

/// PI names are `LAST, FIRST [MIDDLE]`; without a comma the last word is
/// taken as the family name.
pub fn pi_name_key(pi_name: &str) -> Option<NameKey> {
    match pi_name.split_once(',') {
        Some((last, given)) => name_key(last, given),
        None => {
            let (given, last) = pi_name.trim().rsplit_once(' ')?;
            name_key(last, given)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_and_author_keys_agree() {
        let a = AuthorInstance {
            pmid: 1,
            au_order: 1,
            last_name: Some("Smith".into()),
            fore_name: Some("John".into()),
            initials: Some("J".into()),
            suffix: None,
            affiliation_strings: vec![],
        };
        assert_eq!(author_name_key(&a), pi_name_key("SMITH, JOHN"));
        assert_eq!(pi_name_key("John A Smith"), pi_name_key("SMITH, JOHN A."));
    }

    #[test]
    fn diacritics_and_punctuation_fold() {
        assert_eq!(name_key("Müller", "Ülrich"), name_key("MULLER", "u"));
        assert_eq!(name_key("O'Brien", "K"), name_key("OBrien", "Kate"));
        assert_eq!(name_key("", "K"), None);
        assert_eq!(name_key("Lee", "  "), None);
    }

    #[test]
    fn collective_author_has_no_key() {
        let a = AuthorInstance {
            pmid: 1,
            au_order: 1,
            last_name: None,
            fore_name: None,
            initials: None,
            suffix: None,
            affiliation_strings: vec![],
        };
        assert_eq!(author_name_key(&a), None);
    }
}

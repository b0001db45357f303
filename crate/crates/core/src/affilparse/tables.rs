use std::collections::HashMap;
use std::path::Path;

use regex::Regex;

use super::AffilError;
use crate::text::ascii_fold;

/// Normalizes text for keyword and table matching: ASCII-folded, lowercase,
/// periods dropped, other punctuation collapsed to single spaces.
pub fn match_key(s: &str) -> String {
    let folded = ascii_fold(s);
    let mut out = String::with_capacity(folded.len());
    let mut pending_space = false;
    for c in folded.chars() {
        if c == '.' {
            continue;
        }
        if c.is_ascii_alphanumeric() || c == '-' {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    out
}

/// A keyword category compiled to one alternation.
///
/// A trailing `*` marks a prefix term; other terms match whole words or
/// phrases.
#[derive(Debug, Clone)]
pub struct TermSet {
    terms: Vec<String>,
    regex: Option<Regex>,
}

impl TermSet {
    pub fn parse(text: &str) -> Self {
        let terms: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let alternatives: Vec<String> = terms
            .iter()
            .filter_map(|t| {
                let (body, prefix) = match t.strip_suffix('*') {
                    Some(b) => (b, true),
                    None => (t.as_str(), false),
                };
                let key = match_key(body);
                if key.is_empty() {
                    return None;
                }
                let escaped = regex::escape(&key);
                Some(if prefix {
                    format!("{escaped}[a-z0-9]*")
                } else {
                    escaped
                })
            })
            .collect();
        let regex = (!alternatives.is_empty()).then(|| {
            Regex::new(&format!("(?:^| )(?:{})(?: |$)", alternatives.join("|")))
                .expect("escaped alternation")
        });
        TermSet { terms, regex }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// `key` must already be a [`match_key`].
    pub fn matches_key(&self, key: &str) -> bool {
        self.regex.as_ref().is_some_and(|r| r.is_match(key))
    }

    pub fn matches(&self, text: &str) -> bool {
        self.matches_key(&match_key(text))
    }
}

#[derive(Debug, Clone, Default)]
pub struct CountryTable {
    canonical: HashMap<String, String>,
    max_words: usize,
}

impl CountryTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self, AffilError> {
        let mut table = CountryTable::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (variant, canonical) = line.split_once('\t').ok_or_else(|| AffilError::Table {
                origin: origin.to_string(),
                line: i + 1,
                message: "expected `variant<TAB>canonical`".into(),
            })?;
            let key = match_key(variant);
            table.max_words = table.max_words.max(key.split(' ').count());
            table.canonical.insert(key, canonical.trim().to_string());
            let ck = match_key(canonical);
            table.max_words = table.max_words.max(ck.split(' ').count());
            table.canonical.entry(ck).or_insert_with(|| canonical.trim().to_string());
        }
        Ok(table)
    }

    pub fn canonicalize(&self, name: &str) -> Option<&str> {
        self.canonical.get(&match_key(name)).map(String::as_str)
    }

    /// Finds a country name at the end of `segment`, preferring the longest
    /// suffix. Returns the canonical name and the byte offset where the
    /// match starts in `segment`.
    pub fn find_suffix(&self, segment: &str) -> Option<(&str, usize)> {
        let words: Vec<(usize, &str)> = word_spans(segment);
        for n in (1..=self.max_words.min(words.len())).rev() {
            let start = words[words.len() - n].0;
            if let Some(c) = self.canonicalize(&segment[start..]) {
                return Some((c, start));
            }
        }
        None
    }
}

fn word_spans(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in s.char_indices() {
        if c.is_whitespace() {
            if let Some(b) = start.take() {
                out.push((b, &s[b..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push((b, &s[b..]));
    }
    out
}

#[derive(Debug, Clone)]
pub struct StateTable {
    by_abbr: HashMap<String, String>,
    by_name: HashMap<String, String>,
}

impl StateTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self, AffilError> {
        let mut by_abbr = HashMap::new();
        let mut by_name = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (abbr, name) = line.split_once('\t').ok_or_else(|| AffilError::Table {
                origin: origin.to_string(),
                line: i + 1,
                message: "expected `abbreviation<TAB>name`".into(),
            })?;
            by_abbr.insert(abbr.trim().to_string(), abbr.trim().to_string());
            by_name.insert(match_key(name), abbr.trim().to_string());
        }
        Ok(StateTable { by_abbr, by_name })
    }

    /// Abbreviations must be written in upper case; full names match
    /// case-insensitively. Returns the abbreviation.
    pub fn lookup(&self, text: &str) -> Option<&str> {
        let t = text.trim().trim_end_matches('.');
        self.by_abbr
            .get(t)
            .or_else(|| self.by_name.get(&match_key(t)))
            .map(String::as_str)
    }
}

/// All editable lookup tables the parser and classifier consult.
#[derive(Debug, Clone)]
pub struct KeywordTables {
    pub department: TermSet,
    pub institution: TermSet,
    pub edu: TermSet,
    pub hos: TermSet,
    pub gov: TermSet,
    pub mil: TermSet,
    pub com: TermSet,
    pub org: TermSet,
    pub countries: CountryTable,
    pub us_states: StateTable,
    pub postal: Vec<(String, Regex)>,
}

const FILES: [(&str, &str); 11] = [
    ("department.txt", include_str!("../../data/affil/department.txt")),
    ("institution.txt", include_str!("../../data/affil/institution.txt")),
    ("edu.txt", include_str!("../../data/affil/edu.txt")),
    ("hos.txt", include_str!("../../data/affil/hos.txt")),
    ("gov.txt", include_str!("../../data/affil/gov.txt")),
    ("mil.txt", include_str!("../../data/affil/mil.txt")),
    ("com.txt", include_str!("../../data/affil/com.txt")),
    ("org.txt", include_str!("../../data/affil/org.txt")),
    ("countries.tsv", include_str!("../../data/affil/countries.tsv")),
    ("us_states.tsv", include_str!("../../data/affil/us_states.tsv")),
    ("postal.tsv", include_str!("../../data/affil/postal.tsv")),
];

impl KeywordTables {
    pub fn builtin() -> Self {
        Self::from_sources(|name| Ok(FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| t.to_string())))
            .expect("bundled tables are valid")
    }

    /// Loads tables from `dir`, falling back to the bundled copy for any
    /// file the directory lacks.
    pub fn load_dir(dir: &Path) -> Result<Self, AffilError> {
        Self::from_sources(|name| {
            let path = dir.join(name);
            if path.exists() {
                std::fs::read_to_string(&path)
                    .map(Some)
                    .map_err(|source| AffilError::Io { path: path.display().to_string(), source })
            } else {
                Ok(FILES.iter().find(|(n, _)| *n == name).map(|(_, t)| t.to_string()))
            }
        })
    }

    fn from_sources(mut get: impl FnMut(&str) -> Result<Option<String>, AffilError>) -> Result<Self, AffilError> {
        let mut text = |name: &str| get(name).map(Option::unwrap_or_default);
        let postal_src = text("postal.tsv")?;
        let mut postal = Vec::new();
        for (i, line) in postal_src.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |message: String| AffilError::Table { origin: "postal.tsv".into(), line: i + 1, message };
            let (country, pattern) = line
                .split_once('\t')
                .ok_or_else(|| bad("expected `country<TAB>pattern`".into()))?;
            let re = Regex::new(pattern.trim()).map_err(|e| bad(e.to_string()))?;
            postal.push((country.trim().to_string(), re));
        }
        Ok(KeywordTables {
            department: TermSet::parse(&text("department.txt")?),
            institution: TermSet::parse(&text("institution.txt")?),
            edu: TermSet::parse(&text("edu.txt")?),
            hos: TermSet::parse(&text("hos.txt")?),
            gov: TermSet::parse(&text("gov.txt")?),
            mil: TermSet::parse(&text("mil.txt")?),
            com: TermSet::parse(&text("com.txt")?),
            org: TermSet::parse(&text("org.txt")?),
            countries: CountryTable::parse(&text("countries.tsv")?, "countries.tsv")?,
            us_states: StateTable::parse(&text("us_states.tsv")?, "us_states.tsv")?,
            postal,
        })
    }

    pub fn postal_pattern(&self, country: Option<&str>) -> &Regex {
        let fallback = || {
            &self
                .postal
                .iter()
                .find(|(c, _)| c == "United States")
                .expect("United States postal pattern present")
                .1
        };
        match country {
            Some(c) => self.postal.iter().find(|(k, _)| k == c).map(|(_, r)| r).unwrap_or_else(fallback),
            None => fallback(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn match_key_drops_periods() {
        assert_eq!(match_key("U.S.A."), "usa");
        assert_eq!(match_key("Dept. of  Neurology"), "dept of neurology");
        assert_eq!(match_key("Universität Zürich"), "universitat zurich");
    }

    #[test]
    fn prefix_and_word_terms() {
        let t = TermSet::parse("univ*\ninc\nmedical center\n");
        assert!(t.matches("Universität Basel"));
        assert!(t.matches("Pfizer Inc."));
        assert!(!t.matches("Incyte"));
        assert!(t.matches("Rush Medical Center"));
        assert!(!t.matches("Medical Centers"));
        assert!(!TermSet::parse("").matches("anything"));
    }

    #[test]
    fn country_suffix_prefers_longest() {
        let t = KeywordTables::builtin();
        assert_eq!(t.countries.canonicalize("U.S.A."), Some("United States"));
        assert_eq!(t.countries.find_suffix("MA 02115 USA"), Some(("United States", 9)));
        assert_eq!(t.countries.find_suffix("Republic of Korea").unwrap().0, "South Korea");
        assert_eq!(t.countries.find_suffix("Boston"), None);
    }

    #[test]
    fn state_abbreviations_are_case_sensitive() {
        let t = KeywordTables::builtin();
        assert_eq!(t.us_states.lookup("PA"), Some("PA"));
        assert_eq!(t.us_states.lookup("pennsylvania"), Some("PA"));
        assert_eq!(t.us_states.lookup("in"), None);
    }

    #[test]
    fn load_dir_overrides_single_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("mil.txt"), "coast guard\n").unwrap();
        let t = KeywordTables::load_dir(dir.path()).unwrap();
        assert!(t.mil.matches("US Coast Guard"));
        assert!(!t.mil.matches("Army"));
        assert!(t.edu.matches("College"));
    }
}

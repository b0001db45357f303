use std::sync::LazyLock;

use regex::Regex;

use super::tables::match_key;
use super::{AffiliationFields, AffiliationType, Gazetteer, KeywordTables};
use crate::text::clean;

static EMAIL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i:(?:electronic address|e-?mail(?: address)?)\s*:?\s*)?([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})",
    )
    .unwrap()
});

pub static MAILBOX: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}$").unwrap()
});

static DEFAULT_PARSER: LazyLock<AffiliationParser> =
    LazyLock::new(|| AffiliationParser::new(KeywordTables::builtin(), Gazetteer::default()));

/// Parses with the bundled keyword tables and no gazetteer, so city and
/// non-US states are never filled.
pub fn parse_affiliation(raw: &str) -> AffiliationFields {
    DEFAULT_PARSER.parse(raw)
}

pub fn classify_affiliation_type(raw: &str, tables: &KeywordTables) -> AffiliationType {
    let key = match_key(raw);
    let edu = tables.edu.matches_key(&key);
    let hos = tables.hos.matches_key(&key);
    if edu && hos {
        AffiliationType::EduHos
    } else if edu {
        AffiliationType::Edu
    } else if hos {
        AffiliationType::Hos
    } else if tables.gov.matches_key(&key) {
        AffiliationType::Gov
    } else if tables.mil.matches_key(&key) {
        AffiliationType::Mil
    } else if tables.com.matches_key(&key) {
        AffiliationType::Com
    } else if tables.org.matches_key(&key) {
        AffiliationType::Org
    } else {
        AffiliationType::Unk
    }
}

#[derive(Debug, Clone)]
pub struct AffiliationParser {
    tables: KeywordTables,
    gazetteer: Gazetteer,
}

impl AffiliationParser {
    pub fn new(tables: KeywordTables, gazetteer: Gazetteer) -> Self {
        AffiliationParser { tables, gazetteer }
    }

    pub fn tables(&self) -> &KeywordTables {
        &self.tables
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    /// Extracts fields and the affiliation type. Coordinates are left to
    /// [`super::geocode`].
    pub fn parse(&self, raw: &str) -> AffiliationFields {
        let text = clean(raw);
        let mut f = AffiliationFields {
            affiliation_type: classify_affiliation_type(&text, &self.tables),
            ..Default::default()
        };

        let mut rest = String::with_capacity(text.len());
        let mut last = 0;
        for caps in EMAIL.captures_iter(&text) {
            let whole = caps.get(0).expect("match");
            if f.email.is_none() {
                f.email = Some(caps[1].to_string());
            }
            rest.push_str(&text[last..whole.start()]);
            last = whole.end();
        }
        rest.push_str(&text[last..]);

        let mut segments: Vec<String> = rest
            .split(',')
            .map(|s| s.trim_matches(|c: char| c.is_whitespace() || c == ';').to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if let Some(tail) = segments.last_mut() {
            let trimmed = tail
                .trim_end_matches(|c: char| c == '.' || c == ';' || c.is_whitespace())
                .to_string();
            *tail = trimmed;
            if tail.is_empty() {
                segments.pop();
            }
        }
        if segments.is_empty() {
            return f;
        }

        // The country segment, and what remains of it before the country name.
        let n = segments.len();
        let mut country_residual: Option<String> = None;
        let mut country_only = false;
        if let Some((country, at)) = self.tables.countries.find_suffix(&segments[n - 1]) {
            f.country = Some(country.to_string());
            let residual = segments[n - 1][..at].trim();
            country_only = residual.is_empty();
            if !country_only {
                country_residual = Some(residual.to_string());
            }
        }
        let body = if country_only { n - 1 } else { n };

        let keys: Vec<String> = segments[..body].iter().map(|s| match_key(s)).collect();
        let is_dept: Vec<bool> = keys.iter().map(|k| self.tables.department.matches_key(k)).collect();
        let is_inst: Vec<bool> = keys.iter().map(|k| self.tables.institution.matches_key(k)).collect();
        let institution = (0..body)
            .find(|&i| is_inst[i] && !is_dept[i])
            .or_else(|| (0..body).find(|&i| is_inst[i]));
        let department = (0..body).find(|&i| is_dept[i] && Some(i) != institution);
        f.institution = institution.map(|i| segments[i].clone());
        f.department = department.map(|i| segments[i].clone());

        let tail_start = match (department, institution) {
            (None, None) => 0,
            (d, i) => d.max(i).expect("one present") + 1,
        };

        // Place fields come from the tail; the last segment contributes only
        // its pre-country residual.
        let mut place: Vec<String> = segments[tail_start.min(body)..body].to_vec();
        if body == n && tail_start < n {
            if let Some(r) = &country_residual {
                place.pop();
                place.push(r.clone());
            }
        }
        self.fill_place(&mut f, &place);

        if tail_start > 0 || f.has_place() {
            let located = &segments[tail_start.min(n)..];
            if !located.is_empty() {
                f.location = Some(located.join(", "));
            }
        }
        f
    }

    fn fill_place(&self, f: &mut AffiliationFields, place: &[String]) {
        let country = f.country.as_deref();
        let pattern = self.tables.postal_pattern(country);
        let mut zip_at: Option<usize> = None;
        let mut residuals: Vec<String> = place.to_vec();
        for (i, seg) in place.iter().enumerate().rev() {
            if let Some(m) = pattern.find(seg) {
                f.zip_code = Some(m.as_str().to_string());
                let mut r = String::new();
                r.push_str(seg[..m.start()].trim());
                let after = seg[m.end()..].trim();
                if !after.is_empty() {
                    if !r.is_empty() {
                        r.push(' ');
                    }
                    r.push_str(after);
                }
                residuals[i] = r;
                zip_at = Some(i);
                break;
            }
        }

        let us = matches!(country, None | Some("United States"));
        for (i, seg) in residuals.iter().enumerate() {
            let mut cityish = seg.trim().to_string();
            if cityish.is_empty() {
                continue;
            }
            if f.state.is_none() {
                if let Some(s) = self.whole_state(&cityish, country, us) {
                    f.state = Some(s);
                    continue;
                }
                if us && zip_at == Some(i) {
                    if let Some((head, last)) = cityish.rsplit_once(' ') {
                        if let Some(abbr) = self.tables.us_states.lookup(last).filter(|a| *a == last) {
                            f.state = Some(abbr.to_string());
                            cityish = head.trim().to_string();
                        }
                    }
                }
            }
            if f.city.is_none() && !cityish.is_empty() && self.gazetteer.has_city(&cityish, country) {
                f.city = Some(cityish);
            }
        }
    }

    fn whole_state(&self, text: &str, country: Option<&str>, us: bool) -> Option<String> {
        if us {
            if let Some(abbr) = self.tables.us_states.lookup(text) {
                return Some(abbr.to_string());
            }
        }
        self.gazetteer.has_state(text, country).then(|| text.to_string())
    }
}

impl AffiliationFields {
    fn has_place(&self) -> bool {
        self.country.is_some() || self.state.is_some() || self.city.is_some() || self.zip_code.is_some()
    }
}

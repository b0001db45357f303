//! Dictionary longest-match tagger.
//!
//! Stands in for a neural tagger: every dictionary name found at word
//! boundaries becomes a span with score 1.0. Mutations are additionally
//! recognized by the mutation grammar.

use std::sync::LazyLock;

use regex::Regex;

use super::{normalize_mutation, resolve_type_overlaps, Dictionaries, Dictionary, EntitySpan, EntityType};

static MUTATION_TOKEN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[^\s,;:()\[\]{}/]+").unwrap());

/// Per-type candidates before cross-type resolution. Within one type the
/// candidates never overlap.
pub fn baseline_candidates(pmid: u64, abstract_text: &str, dictionaries: &Dictionaries) -> Vec<EntitySpan> {
    if abstract_text.is_empty() {
        return Vec::new();
    }
    let chars: Vec<char> = abstract_text.chars().collect();
    let boundaries = WordBoundaries::new(&chars);
    let mut out = Vec::new();
    for entity_type in EntityType::ALL {
        let mut spans = match dictionaries.get(entity_type) {
            Some(dict) => longest_matches(pmid, &chars, &boundaries, dict),
            None => Vec::new(),
        };
        if entity_type == EntityType::Mutation {
            for m in grammar_mutations(pmid, abstract_text) {
                if !spans.iter().any(|s| s.overlaps(&m)) {
                    spans.push(m);
                }
            }
            spans.sort_by_key(|s| s.start);
        }
        out.extend(spans);
    }
    out
}

/// Candidates resolved across types.
pub fn baseline_tag(pmid: u64, abstract_text: &str, dictionaries: &Dictionaries) -> Vec<EntitySpan> {
    resolve_type_overlaps(baseline_candidates(pmid, abstract_text, dictionaries)).kept
}

struct WordBoundaries {
    starts: Vec<usize>,
    ends: Vec<usize>,
}

impl WordBoundaries {
    fn new(chars: &[char]) -> Self {
        let n = chars.len();
        let word = |i: usize| chars[i].is_alphanumeric();
        let starts = (0..n).filter(|&i| word(i) && (i == 0 || !word(i - 1))).collect();
        let ends = (1..=n).filter(|&j| word(j - 1) && (j == n || !word(j))).collect();
        Self { starts, ends }
    }
}

fn longest_matches(pmid: u64, chars: &[char], bounds: &WordBoundaries, dict: &Dictionary) -> Vec<EntitySpan> {
    let max_len = dict.max_name_chars();
    let mut spans = Vec::new();
    let mut next_free = 0;
    for &start in &bounds.starts {
        if start < next_free {
            continue;
        }
        // word ends after `start`, longest candidate first
        let first_end = bounds.ends.partition_point(|&e| e <= start);
        let last_end = bounds.ends.partition_point(|&e| e <= start + max_len.saturating_mul(2));
        for &end in bounds.ends[first_end..last_end.max(first_end)].iter().rev() {
            let surface: String = chars[start..end].iter().collect();
            let key = crate::text::fold_key(&surface);
            if key.chars().count() > max_len {
                continue;
            }
            if dict.lookup_folded(&key).is_some() {
                spans.push(EntitySpan {
                    pmid,
                    start,
                    end,
                    mention: surface,
                    entity_type: dict.entity_type,
                    score: 1.0,
                });
                next_free = end;
                break;
            }
        }
    }
    spans
}

fn grammar_mutations(pmid: u64, text: &str) -> Vec<EntitySpan> {
    let mut out = Vec::new();
    for m in MUTATION_TOKEN.find_iter(text) {
        let token = m.as_str().trim_end_matches(['.', '\'', '"']);
        if token.is_empty() || normalize_mutation(token).is_none() {
            continue;
        }
        let start = text[..m.start()].chars().count();
        let end = start + token.chars().count();
        out.push(EntitySpan {
            pmid,
            start,
            end,
            mention: token.to_string(),
            entity_type: EntityType::Mutation,
            score: 1.0,
        });
    }
    out
}

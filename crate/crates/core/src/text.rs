//! Small text utilities shared by the parsers and matchers.

use std::borrow::Cow;

use unicode_normalization::{char::is_combining_mark, UnicodeNormalization};

/// Decodes bytes as UTF-8, replacing each invalid sequence with U+FFFD.
///
/// Returns the decoded text and the number of replaced sequences.
pub fn decode_lossy(bytes: &[u8]) -> (Cow<'_, str>, usize) {
    match std::str::from_utf8(bytes) {
        Ok(s) => (Cow::Borrowed(s), 0),
        Err(_) => {
            let mut out = String::with_capacity(bytes.len());
            let mut replaced = 0;
            for chunk in bytes.utf8_chunks() {
                out.push_str(chunk.valid());
                if !chunk.invalid().is_empty() {
                    out.push(char::REPLACEMENT_CHARACTER);
                    replaced += 1;
                }
            }
            (Cow::Owned(out), replaced)
        }
    }
}

/// Trims surrounding whitespace and applies Unicode NFC.
pub fn clean(s: &str) -> String {
    s.trim().nfc().collect()
}

/// Case-folded, NFC-normalized, trimmed lookup key.
pub fn fold_key(s: &str) -> String {
    let nfc: String = s.trim().nfc().collect();
    nfc.to_lowercase()
}

/// Lowercase ASCII transliteration with diacritics stripped.
///
/// `"Müller"` and `"muller"` produce the same key.
pub fn ascii_fold(s: &str) -> String {
    let stripped: String = s.nfd().filter(|c| !is_combining_mark(*c)).collect();
    deunicode::deunicode(&stripped).to_lowercase()
}

/// Title key used for fuzzy-free title comparison: casefold, drop
/// punctuation, collapse whitespace.
pub fn title_key(s: &str) -> String {
    let folded = ascii_fold(s);
    let mut out = String::with_capacity(folded.len());
    for word in folded
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
    {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Substring by code-point offsets, end exclusive. Returns `None` when out
/// of range.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = s.char_indices().map(|(i, _)| i).chain(std::iter::once(s.len()));
    let begin = indices.nth(start)?;
    let finish = if end == start {
        begin
    } else {
        indices.nth(end - start - 1)?
    };
    Some(&s[begin..finish])
}

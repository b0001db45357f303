//! Seven-tag token distributions and IOB2 span decoding with WordPiece
//! continuation (`X`) merging.

use serde::{Deserialize, Serialize};

use super::{BioError, EntitySpan, EntityType};
use crate::text::{char_len, char_slice};

const SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    B,
    I,
    O,
    X,
    Cls,
    Sep,
    Pad,
}

impl Tag {
    /// Index order of the probability vector.
    pub const ORDER: [Tag; 7] = [Tag::B, Tag::I, Tag::O, Tag::X, Tag::Cls, Tag::Sep, Tag::Pad];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_structural(self) -> bool {
        matches!(self, Tag::Cls | Tag::Sep | Tag::Pad)
    }

    /// Probability vector with all mass on this tag.
    pub fn one_hot(self) -> [f64; 7] {
        let mut p = [0.0; 7];
        p[self.index()] = 1.0;
        p
    }
}

/// Model output for one token. `start`/`end` are code-point offsets into
/// the abstract and are absent for `[CLS]`, `[SEP]` and padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagDistribution {
    pub text: String,
    pub start: Option<usize>,
    pub end: Option<usize>,
    pub probs: [f64; 7],
}

impl TagDistribution {
    pub fn validate(&self) -> Result<(), String> {
        if let Some(p) = self.probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(format!("probability {p} out of range"));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(format!("probabilities sum to {sum}"));
        }
        Ok(())
    }

    /// Most probable tag; the lower index wins ties.
    pub fn argmax(&self) -> (Tag, f64) {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate().skip(1) {
            if *p > self.probs[best] {
                best = i;
            }
        }
        (Tag::ORDER[best], self.probs[best])
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DecodedSpans {
    pub spans: Vec<EntitySpan>,
    /// Spans opened by an `I` with no preceding `B`.
    pub orphan_repairs: usize,
}

struct OpenSpan {
    start: usize,
    end: usize,
    score_sum: f64,
    members: usize,
}

/// Decodes one abstract's token distributions for one entity type.
///
/// `X` sub-tokens continue whatever the preceding word was: inside a span
/// they extend it, outside they stay outside.
pub fn decode_tag_sequence(
    pmid: u64,
    tokens: &[TagDistribution],
    entity_type: EntityType,
    abstract_text: &str,
) -> Result<DecodedSpans, BioError> {
    let text_len = char_len(abstract_text);
    let mut out = DecodedSpans::default();
    let mut open: Option<OpenSpan> = None;

    let close = |open: &mut Option<OpenSpan>, spans: &mut Vec<EntitySpan>| {
        if let Some(o) = open.take() {
            let mention = char_slice(abstract_text, o.start, o.end)
                .expect("offsets validated")
                .to_string();
            spans.push(EntitySpan {
                pmid,
                start: o.start,
                end: o.end,
                mention,
                entity_type,
                score: o.score_sum / o.members as f64,
            });
        }
    };

    for (index, token) in tokens.iter().enumerate() {
        token
            .validate()
            .map_err(|reason| BioError::Distribution { index, reason })?;
        let (tag, p) = token.argmax();
        if tag.is_structural() {
            close(&mut open, &mut out.spans);
            continue;
        }
        let alignment = |reason: String| BioError::Alignment {
            index,
            text: token.text.clone(),
            reason,
        };
        let (start, end) = match (token.start, token.end) {
            (Some(s), Some(e)) => (s, e),
            _ => return Err(alignment("missing offsets on a non-structural token".into())),
        };
        if start >= end {
            return Err(alignment(format!("empty or inverted range {start}..{end}")));
        }
        if end > text_len {
            return Err(alignment(format!("end {end} exceeds abstract length {text_len}")));
        }
        match tag {
            Tag::O => close(&mut open, &mut out.spans),
            Tag::B => {
                close(&mut open, &mut out.spans);
                open = Some(OpenSpan { start, end, score_sum: p, members: 1 });
            }
            Tag::I | Tag::X => match open.as_mut() {
                Some(o) => {
                    o.end = o.end.max(end);
                    o.score_sum += p;
                    o.members += 1;
                }
                None if tag == Tag::I => {
                    out.orphan_repairs += 1;
                    open = Some(OpenSpan { start, end, score_sum: p, members: 1 });
                }
                None => {}
            },
            Tag::Cls | Tag::Sep | Tag::Pad => unreachable!(),
        }
    }
    close(&mut open, &mut out.spans);
    Ok(out)
}

/// Token position used by [`encode_tags`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenSlot {
    pub start: usize,
    pub end: usize,
    /// WordPiece continuation piece (`##...`).
    pub continuation: bool,
}

/// Gold IOB2+X tags for word-aligned spans (code-point ranges).
///
/// Continuation pieces are always `X`; a word's first piece is `B` when a
/// span starts there, `I` inside a span and `O` elsewhere.
pub fn encode_tags(tokens: &[TokenSlot], spans: &[(usize, usize)]) -> Vec<Tag> {
    tokens
        .iter()
        .map(|t| {
            if t.continuation {
                Tag::X
            } else if spans.iter().any(|&(s, _)| s == t.start) {
                Tag::B
            } else if spans.iter().any(|&(s, e)| s < t.start && t.end <= e) {
                Tag::I
            } else {
                Tag::O
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tok(text: &str, start: usize, end: usize, tag: Tag) -> TagDistribution {
        TagDistribution {
            text: text.into(),
            start: Some(start),
            end: Some(end),
            probs: tag.one_hot(),
        }
    }

    fn structural(tag: Tag) -> TagDistribution {
        TagDistribution {
            text: format!("{tag:?}"),
            start: None,
            end: None,
            probs: tag.one_hot(),
        }
    }

    #[test]
    fn all_outside_is_empty() {
        let text = "no entities here";
        let toks = vec![
            structural(Tag::Cls),
            tok("no", 0, 2, Tag::O),
            tok("entities", 3, 11, Tag::O),
            tok("here", 12, 16, Tag::O),
            structural(Tag::Sep),
        ];
        let d = decode_tag_sequence(1, &toks, EntityType::Gene, text).unwrap();
        assert!(d.spans.is_empty());
    }

    #[test]
    fn immunoglobulin_sub_tokens_merge() {
        let text = "Immunoglobulin levels";
        let pieces = [("I", 0, 1), ("##mm", 1, 3), ("##uno", 3, 6), ("##g", 6, 7), ("##lo", 7, 9), ("##bul", 9, 12), ("##in", 12, 14)];
        let mut toks = vec![structural(Tag::Cls)];
        for (i, (t, s, e)) in pieces.iter().enumerate() {
            toks.push(tok(t, *s, *e, if i == 0 { Tag::B } else { Tag::X }));
        }
        toks.push(tok("levels", 15, 21, Tag::O));
        toks.push(structural(Tag::Sep));
        let d = decode_tag_sequence(9, &toks, EntityType::Gene, text).unwrap();
        assert_eq!(d.spans.len(), 1);
        let s = &d.spans[0];
        assert_eq!((s.start, s.end, s.mention.as_str()), (0, 14, "Immunoglobulin"));
        assert_eq!(s.score, 1.0);
    }

    #[test]
    fn orphan_inside_opens_span_and_is_counted() {
        let text = "the BRCA1 gene";
        let toks = vec![tok("the", 0, 3, Tag::O), tok("BRCA1", 4, 9, Tag::I), tok("gene", 10, 14, Tag::I)];
        let d = decode_tag_sequence(1, &toks, EntityType::Gene, text).unwrap();
        assert_eq!(d.orphan_repairs, 1);
        assert_eq!(d.spans.len(), 1);
        assert_eq!(d.spans[0].mention, "BRCA1 gene");
    }

    #[test]
    fn x_after_outside_word_stays_outside() {
        let text = "unrelated";
        let toks = vec![tok("un", 0, 2, Tag::O), tok("##related", 2, 9, Tag::X)];
        let d = decode_tag_sequence(1, &toks, EntityType::Gene, text).unwrap();
        assert!(d.spans.is_empty());
    }

    #[test]
    fn score_is_mean_of_member_maxima() {
        let text = "TP53 mutant";
        let mut b = tok("TP", 0, 2, Tag::B);
        b.probs = [0.8, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0];
        let mut x = tok("##53", 2, 4, Tag::X);
        x.probs = [0.0, 0.2, 0.2, 0.6, 0.0, 0.0, 0.0];
        let d = decode_tag_sequence(1, &[b, x], EntityType::Gene, text).unwrap();
        assert!((d.spans[0].score - 0.7).abs() < 1e-12);
    }

    #[test]
    fn offsets_beyond_abstract_are_rejected() {
        let toks = vec![tok("abc", 0, 10, Tag::B)];
        let err = decode_tag_sequence(1, &toks, EntityType::Gene, "abc").unwrap_err();
        assert!(matches!(err, BioError::Alignment { index: 0, .. }));
    }

    #[test]
    fn bad_distribution_is_rejected() {
        let mut t = tok("a", 0, 1, Tag::B);
        t.probs[0] = 0.5;
        let err = decode_tag_sequence(1, &[t], EntityType::Gene, "a").unwrap_err();
        assert!(matches!(err, BioError::Distribution { .. }));
    }

    #[test]
    fn code_point_offsets() {
        let text = "α-synuclein in Parkinson";
        let toks = vec![tok("α", 0, 1, Tag::B), tok("##-synuclein", 1, 11, Tag::X), tok("in", 12, 14, Tag::O)];
        let d = decode_tag_sequence(1, &toks, EntityType::Gene, text).unwrap();
        assert_eq!(d.spans[0].mention, "α-synuclein");
    }

    #[test]
    fn encode_marks_words() {
        let slots = [
            TokenSlot { start: 0, end: 1, continuation: false },
            TokenSlot { start: 1, end: 3, continuation: true },
            TokenSlot { start: 4, end: 6, continuation: false },
            TokenSlot { start: 7, end: 9, continuation: false },
        ];
        assert_eq!(encode_tags(&slots, &[(0, 6)]), [Tag::B, Tag::X, Tag::I, Tag::O]);
    }
}

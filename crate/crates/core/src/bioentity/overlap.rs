//! Cross-type overlap resolution.
//!
//! Candidates are visited strongest first (score, then type priority, then
//! earlier start) and kept when they do not overlap anything already kept
//! in the same abstract. The visiting order is a total order on the span
//! fields, so the result does not depend on input order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::EntitySpan;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OverlapResolution {
    /// Surviving spans sorted by (pmid, start, end, type).
    pub kept: Vec<EntitySpan>,
    pub dropped: Vec<EntitySpan>,
    /// Abstracts where at least one span was dropped.
    pub pmids_with_overlap: BTreeSet<u64>,
}

fn strength_order(a: &EntitySpan, b: &EntitySpan) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.entity_type.priority().cmp(&b.entity_type.priority()))
        .then(a.start.cmp(&b.start))
        .then(a.end.cmp(&b.end))
        .then(a.pmid.cmp(&b.pmid))
        .then_with(|| a.mention.cmp(&b.mention))
}

fn position_order(a: &EntitySpan, b: &EntitySpan) -> Ordering {
    (a.pmid, a.start, a.end, a.entity_type.priority())
        .cmp(&(b.pmid, b.start, b.end, b.entity_type.priority()))
}

pub fn resolve_type_overlaps(mut spans: Vec<EntitySpan>) -> OverlapResolution {
    spans.sort_by(strength_order);
    // pmid -> (start -> end) of kept, pairwise disjoint intervals
    let mut kept_intervals: BTreeMap<u64, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut out = OverlapResolution::default();
    for span in spans {
        let intervals = kept_intervals.entry(span.pmid).or_default();
        // Among disjoint intervals, the one with the greatest start below
        // `span.end` also has the greatest end; it alone decides overlap.
        let blocked = intervals
            .range(..span.end)
            .next_back()
            .is_some_and(|(_, &end)| end > span.start);
        if blocked {
            out.pmids_with_overlap.insert(span.pmid);
            out.dropped.push(span);
        } else {
            intervals.insert(span.start, span.end);
            out.kept.push(span);
        }
    }
    out.kept.sort_by(position_order);
    out.dropped.sort_by(position_order);
    out
}

/// Fraction of abstracts containing at least one resolved overlap.
pub fn overlap_rate(abstracts_with_overlap: usize, total_abstracts: usize) -> f64 {
    if total_abstracts == 0 {
        0.0
    } else {
        abstracts_with_overlap as f64 / total_abstracts as f64
    }
}

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::ParsedAffiliation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InheritanceReport {
    pub instances: usize,
    pub covered_before: usize,
    pub covered_after: usize,
    pub inherited_instances: usize,
}

impl InheritanceReport {
    pub fn coverage_before(&self) -> f64 {
        ratio(self.covered_before, self.instances)
    }

    pub fn coverage_after(&self) -> f64 {
        ratio(self.covered_after, self.instances)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn covered_instances(records: &[ParsedAffiliation]) -> (usize, usize) {
    let mut all = BTreeSet::new();
    let mut covered = BTreeSet::new();
    for r in records {
        all.insert((r.pmid, r.au_order));
        if r.fields.has_fields() {
            covered.insert((r.pmid, r.au_order));
        }
    }
    (all.len(), covered.len())
}

/// Fills affiliation-less instances at or after `cutoff_year` from the
/// author's latest pre-cutoff parsed record.
///
/// Every author instance is expected to appear at least once in `records`;
/// an instance without affiliation strings is represented by one record
/// with an empty `raw`. Records with AND_ID 0 or no year never take part.
pub fn inherit_affiliations(records: &mut [ParsedAffiliation], cutoff_year: i32) -> InheritanceReport {
    let (instances, covered_before) = covered_instances(records);

    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if let (Some(and_id), Some(_)) = (r.and_id, r.pub_year) {
            if and_id != 0 {
                groups.entry(and_id).or_default().push(i);
            }
        }
    }

    let view: &[ParsedAffiliation] = records;
    let plan: Vec<(usize, usize)> = groups
        .par_iter()
        .flat_map_iter(|(_, idx)| plan_group(view, idx, cutoff_year))
        .collect();

    let inherited_instances = plan.len();
    for (target, source) in plan {
        let src = records[source].fields.clone();
        let t = &mut records[target];
        t.fields.fill_from(&src);
        t.inherited = true;
    }

    let (_, covered_after) = covered_instances(records);
    InheritanceReport {
        instances,
        covered_before,
        covered_after,
        inherited_instances,
    }
}

fn plan_group(records: &[ParsedAffiliation], idx: &[usize], cutoff: i32) -> Vec<(usize, usize)> {
    // Latest pre-cutoff record with fields; ties in year go to the larger
    // (pmid, au_order), then the smaller affiliation_order.
    let source = idx
        .iter()
        .copied()
        .filter(|&i| records[i].pub_year.is_some_and(|y| y < cutoff) && records[i].fields.has_fields())
        .max_by(|&a, &b| {
            let (ra, rb) = (&records[a], &records[b]);
            (ra.pub_year, ra.pmid, ra.au_order, std::cmp::Reverse(ra.affiliation_order)).cmp(&(
                rb.pub_year,
                rb.pmid,
                rb.au_order,
                std::cmp::Reverse(rb.affiliation_order),
            ))
        });
    let Some(source) = source else {
        return Vec::new();
    };

    let mut by_instance: BTreeMap<(u64, u32), Vec<usize>> = BTreeMap::new();
    for &i in idx {
        if records[i].pub_year.is_some_and(|y| y >= cutoff) {
            by_instance.entry((records[i].pmid, records[i].au_order)).or_default().push(i);
        }
    }
    by_instance
        .into_values()
        .filter(|members| members.iter().all(|&i| !records[i].fields.has_fields()))
        .filter_map(|members| members.into_iter().min_by_key(|&i| records[i].affiliation_order))
        .map(|target| (target, source))
        .collect()
}

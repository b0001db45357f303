//! Reconciles a primary and a secondary author clustering into one AND_ID
//! space.
//!
//! 1. Instances labelled by the primary source keep the primary ID.
//! 2. A secondary cluster with no primary-labelled member gets one fresh ID.
//!    Fresh IDs continue above the largest primary ID and are handed out in
//!    ascending order of each cluster's smallest instance key.
//! 3. In a secondary cluster with primary-labelled members, unlabelled
//!    members take the primary ID. When several primary IDs are present
//!    the most frequent wins (smallest on ties) and a [`ConflictRecord`] is
//!    logged.
//!
//! Instances in neither source get AND_ID 0 via [`UnifiedAssignment::cover`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{InstanceKey, SourceClustering};

pub const UNDISAMBIGUATED: u64 = 0;

pub const MAJORITY_RULE: &str = "majority primary id, ties to smallest";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConflictRecord {
    pub source_b_cluster: u64,
    /// Primary ID to number of cluster members carrying it.
    pub authority_ids_present: BTreeMap<u64, usize>,
    pub resolution: u64,
    /// Unlabelled members that received `resolution`.
    pub instances_resolved: usize,
    pub rule: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UnifiedAssignment {
    pub and_id_of: BTreeMap<InstanceKey, u64>,
    /// Smallest fresh ID; every fresh ID is at least this.
    pub fresh_id_floor: u64,
    pub conflict_log: Vec<ConflictRecord>,
}

impl UnifiedAssignment {
    pub fn and_id(&self, key: &InstanceKey) -> u64 {
        self.and_id_of.get(key).copied().unwrap_or(UNDISAMBIGUATED)
    }

    /// Adds AND_ID 0 for every key not covered by either source.
    pub fn cover(&mut self, keys: impl IntoIterator<Item = InstanceKey>) -> usize {
        let mut added = 0;
        for key in keys {
            self.and_id_of.entry(key).or_insert_with(|| {
                added += 1;
                UNDISAMBIGUATED
            });
        }
        added
    }

    /// The non-zero part of the assignment as a clustering.
    pub fn as_clustering(&self, source_name: &str) -> SourceClustering {
        let mut c = SourceClustering::new(source_name);
        c.assignments = self
            .and_id_of
            .iter()
            .filter(|(_, id)| **id != UNDISAMBIGUATED)
            .map(|(k, id)| (*k, *id))
            .collect();
        c
    }
}

fn majority(counts: &BTreeMap<u64, usize>) -> u64 {
    // BTreeMap iterates ascending, so `max_by` keeps the later (larger) key
    // on ties; compare with reversed ID to keep the smallest instead.
    counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(id, _)| *id)
        .expect("non-empty counts")
}

fn group_clusters(src: &SourceClustering) -> BTreeMap<u64, Vec<InstanceKey>> {
    let mut clusters: BTreeMap<u64, Vec<InstanceKey>> = BTreeMap::new();
    for (key, cluster) in &src.assignments {
        clusters.entry(*cluster).or_default().push(*key);
    }
    clusters
}

pub fn merge_clusterings(primary: &SourceClustering, secondary: &SourceClustering) -> UnifiedAssignment {
    let max_primary = primary.assignments.values().copied().max().unwrap_or(0);
    let mut out = UnifiedAssignment {
        and_id_of: primary.assignments.clone(),
        fresh_id_floor: max_primary + 1,
        conflict_log: Vec::new(),
    };

    let mut unlabeled_clusters: Vec<(InstanceKey, Vec<InstanceKey>)> = Vec::new();
    for (cluster, members) in group_clusters(secondary) {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for key in &members {
            if let Some(p) = primary.get(key) {
                *counts.entry(p).or_default() += 1;
            }
        }
        if counts.is_empty() {
            // members are already sorted; the first is the cluster's minimum
            unlabeled_clusters.push((members[0], members));
            continue;
        }
        let chosen = majority(&counts);
        let mut resolved = 0;
        for key in &members {
            if primary.get(key).is_none() {
                out.and_id_of.insert(*key, chosen);
                resolved += 1;
            }
        }
        if counts.len() > 1 {
            out.conflict_log.push(ConflictRecord {
                source_b_cluster: cluster,
                authority_ids_present: counts,
                resolution: chosen,
                instances_resolved: resolved,
                rule: MAJORITY_RULE.to_string(),
            });
        }
    }

    unlabeled_clusters.sort_by_key(|(min_key, _)| *min_key);
    for (offset, (_, members)) in unlabeled_clusters.into_iter().enumerate() {
        let fresh = out.fresh_id_floor + offset as u64;
        for key in members {
            out.and_id_of.insert(key, fresh);
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub step1_instances: usize,
    pub step2_instances: usize,
    pub step2_clusters: usize,
    pub step3_instances: usize,
    pub zero_instances: usize,
    pub conflicts: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeError {
    #[error("merge invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },
}

fn violation(name: &'static str, detail: impl Into<String>) -> MergeError {
    MergeError::Invariant {
        name,
        detail: detail.into(),
    }
}

/// Re-derives per-step counts and checks the merge invariants.
pub fn validate_merge(
    assignment: &UnifiedAssignment,
    primary: &SourceClustering,
    secondary: &SourceClustering,
) -> Result<MergeReport, MergeError> {
    let mut report = MergeReport {
        conflicts: assignment.conflict_log.len(),
        ..MergeReport::default()
    };
    let primary_ids: BTreeSet<u64> = primary.assignments.values().copied().collect();
    let max_primary = primary_ids.last().copied().unwrap_or(0);

    for (key, p) in &primary.assignments {
        match assignment.and_id_of.get(key) {
            Some(id) if id == p => report.step1_instances += 1,
            other => {
                return Err(violation(
                    "step1-preservation",
                    format!("{key:?} has primary id {p} but AND_ID {other:?}"),
                ))
            }
        }
    }

    let mut fresh_ids: BTreeSet<u64> = BTreeSet::new();
    for (cluster, members) in group_clusters(secondary) {
        let labeled: BTreeSet<u64> = members.iter().filter_map(|k| primary.get(k)).collect();
        let mut ids = BTreeSet::new();
        for key in &members {
            match assignment.and_id_of.get(key) {
                None | Some(&UNDISAMBIGUATED) => {
                    return Err(violation("coverage", format!("{key:?} from secondary cluster {cluster} has no AND_ID")))
                }
                Some(id) => {
                    ids.insert(*id);
                }
            }
        }
        let unlabeled = members.iter().filter(|k| primary.get(k).is_none()).count();
        if labeled.is_empty() {
            if ids.len() != 1 {
                return Err(violation("fresh-cohesion", format!("secondary cluster {cluster} split over {ids:?}")));
            }
            let id = *ids.first().unwrap();
            if id <= max_primary || primary_ids.contains(&id) {
                return Err(violation("fresh-freshness", format!("fresh id {id} not above {max_primary}")));
            }
            if !fresh_ids.insert(id) {
                return Err(violation("fresh-uniqueness", format!("fresh id {id} reused")));
            }
            report.step2_clusters += 1;
            report.step2_instances += members.len();
        } else {
            if labeled.len() == 1 && ids.len() != 1 {
                return Err(violation("co-cluster-cohesion", format!("secondary cluster {cluster} split over {ids:?}")));
            }
            report.step3_instances += unlabeled;
        }
    }
    if let Some(min_fresh) = fresh_ids.first() {
        if *min_fresh != max_primary + 1 {
            return Err(violation("fresh-floor", format!("smallest fresh id {min_fresh}, expected {}", max_primary + 1)));
        }
    }

    for (key, id) in &assignment.and_id_of {
        let in_source = primary.get(key).is_some() || secondary.get(key).is_some();
        if *id == UNDISAMBIGUATED {
            if in_source {
                return Err(violation("zero-only-uncovered", format!("{key:?} is covered but has AND_ID 0")));
            }
            report.zero_instances += 1;
        } else if !in_source {
            return Err(violation("zero-only-uncovered", format!("{key:?} is in neither source but has AND_ID {id}")));
        }
    }
    Ok(report)
}

/// Unified TSV: `pmid<TAB>au_order<TAB>and_id`, ascending by key.
pub fn write_unified<W: Write>(mut w: W, assignment: &UnifiedAssignment) -> std::io::Result<()> {
    for (key, id) in &assignment.and_id_of {
        writeln!(w, "{}\t{}\t{}", key.pmid, key.au_order, id)?;
    }
    Ok(())
}

pub fn read_unified<R: BufRead>(r: R) -> Result<BTreeMap<InstanceKey, u64>, String> {
    let mut out = BTreeMap::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("line {}: bad integer {s:?}", idx + 1));
        if f.len() != 3 {
            return Err(format!("line {}: expected 3 fields", idx + 1));
        }
        let key = InstanceKey::new(parse(f[0])?, parse(f[1])? as u32);
        if out.insert(key, parse(f[2])?).is_some() {
            return Err(format!("line {}: duplicate key", idx + 1));
        }
    }
    Ok(out)
}

/// Conflict log CSV. `authority_ids` is `id:count` pairs joined by `;`.
pub fn write_conflicts<W: Write>(mut w: W, log: &[ConflictRecord]) -> std::io::Result<()> {
    writeln!(w, "source_b_cluster,authority_ids,resolution,instances_resolved,rule")?;
    for c in log {
        let ids: Vec<String> = c.authority_ids_present.iter().map(|(id, n)| format!("{id}:{n}")).collect();
        writeln!(
            w,
            "{},{},{},{},{}",
            c.source_b_cluster,
            ids.join(";"),
            c.resolution,
            c.instances_resolved,
            c.rule
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(pmid: u64, au: u32) -> InstanceKey {
        InstanceKey::new(pmid, au)
    }

    fn src(name: &str, pairs: &[((u64, u32), u64)]) -> SourceClustering {
        SourceClustering::from_pairs(name, pairs.iter().map(|((p, a), c)| (k(*p, *a), *c))).unwrap()
    }

    #[test]
    fn pietranico_gets_one_fresh_id() {
        // Pietranico R.: papers 2012 (pmid 2012001) and 2013 (2013001), secondary only.
        let primary = src("authority", &[((2007001, 1), 42), ((2009001, 1), 42), ((1999001, 2), 17)]);
        let secondary = src("s2", &[((2012001, 1), 900), ((2013001, 3), 900)]);
        let u = merge_clusterings(&primary, &secondary);
        assert_eq!(u.and_id(&k(2012001, 1)), 43);
        assert_eq!(u.and_id(&k(2013001, 3)), 43);
        assert_eq!(u.fresh_id_floor, 43);
    }

    #[test]
    fn maneksha_inherits_primary_id() {
        let primary = src("authority", &[((2007001, 1), 42), ((2009001, 1), 42)]);
        let secondary = src("s2", &[((2007001, 1), 5), ((2009001, 1), 5), ((2010001, 2), 5)]);
        let u = merge_clusterings(&primary, &secondary);
        assert_eq!(u.and_id(&k(2010001, 2)), 42);
        assert!(u.conflict_log.is_empty());
    }

    #[test]
    fn uncovered_instance_is_zero() {
        let primary = src("authority", &[((1, 1), 3)]);
        let secondary = src("s2", &[((2, 1), 8)]);
        let mut u = merge_clusterings(&primary, &secondary);
        assert_eq!(u.cover([k(1, 1), k(2, 1), k(3, 1)]), 1);
        assert_eq!(u.and_id(&k(3, 1)), 0);
        let r = validate_merge(&u, &primary, &secondary).unwrap();
        assert_eq!(r.zero_instances, 1);
    }

    #[test]
    fn conflicting_primary_ids_take_smaller_on_tie() {
        let primary = src("authority", &[((1, 1), 7), ((2, 1), 9)]);
        let secondary = src("s2", &[((1, 1), 4), ((2, 1), 4), ((3, 1), 4)]);
        let u = merge_clusterings(&primary, &secondary);
        assert_eq!(u.and_id(&k(3, 1)), 7);
        assert_eq!(u.conflict_log.len(), 1);
        let c = &u.conflict_log[0];
        assert_eq!(c.authority_ids_present, BTreeMap::from([(7, 1), (9, 1)]));
        assert_eq!((c.resolution, c.instances_resolved), (7, 1));
    }

    #[test]
    fn majority_beats_smaller_id() {
        let primary = src("authority", &[((1, 1), 7), ((2, 1), 9), ((4, 1), 9)]);
        let secondary = src("s2", &[((1, 1), 4), ((2, 1), 4), ((3, 1), 4), ((4, 1), 4)]);
        let u = merge_clusterings(&primary, &secondary);
        assert_eq!(u.and_id(&k(3, 1)), 9);
    }

    #[test]
    fn disjoint_sources_fresh_count_equals_clusters() {
        let primary = src("authority", &[((1, 1), 1)]);
        let secondary = src("s2", &[((5, 1), 30), ((6, 1), 10), ((7, 2), 30), ((8, 1), 20)]);
        let u = merge_clusterings(&primary, &secondary);
        let r = validate_merge(&u, &primary, &secondary).unwrap();
        assert_eq!(r.step2_clusters, 3);
        // ascending by minimal key: cluster 30 (5,1) -> 2, cluster 10 (6,1) -> 3, cluster 20 (8,1) -> 4
        assert_eq!(u.and_id(&k(5, 1)), 2);
        assert_eq!(u.and_id(&k(7, 2)), 2);
        assert_eq!(u.and_id(&k(6, 1)), 3);
        assert_eq!(u.and_id(&k(8, 1)), 4);
    }

    #[test]
    fn empty_sources() {
        let u = merge_clusterings(&SourceClustering::new("a"), &SourceClustering::new("b"));
        let r = validate_merge(&u, &SourceClustering::new("a"), &SourceClustering::new("b")).unwrap();
        assert_eq!(r, MergeReport::default());
        assert_eq!(u.fresh_id_floor, 1);
    }

    #[test]
    fn validation_catches_tampering() {
        let primary = src("authority", &[((1, 1), 7)]);
        let secondary = src("s2", &[((1, 1), 4), ((2, 1), 4)]);
        let mut u = merge_clusterings(&primary, &secondary);
        u.and_id_of.insert(k(2, 1), 99);
        let err = validate_merge(&u, &primary, &secondary).unwrap_err();
        assert!(matches!(err, MergeError::Invariant { name: "co-cluster-cohesion", .. }));
        u.and_id_of.insert(k(1, 1), 8);
        let err = validate_merge(&u, &primary, &secondary).unwrap_err();
        assert!(matches!(err, MergeError::Invariant { name: "step1-preservation", .. }));
    }

    #[test]
    fn unified_tsv_round_trip() {
        let primary = src("authority", &[((1, 1), 7)]);
        let secondary = src("s2", &[((2, 1), 4)]);
        let mut u = merge_clusterings(&primary, &secondary);
        u.cover([k(3, 2)]);
        let mut buf = Vec::new();
        write_unified(&mut buf, &u).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "1\t1\t7\n2\t1\t8\n3\t2\t0\n");
        assert_eq!(read_unified(buf.as_slice()).unwrap(), u.and_id_of);
    }
}

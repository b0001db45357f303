use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use pubkg::andmerge::{merge_clusterings, validate_merge, ConflictRecord, MAJORITY_RULE};
use pubkg::ingest::{InstanceKey, SourceClustering};

fn clustering(name: &str, pairs: BTreeMap<(u64, u32), u64>) -> SourceClustering {
    SourceClustering::from_pairs(name, pairs.into_iter().map(|((p, a), c)| (InstanceKey::new(p, a), c))).unwrap()
}

fn sources() -> impl Strategy<Value = (SourceClustering, SourceClustering)> {
    let key = (1u64..60, 1u32..5);
    (
        prop::collection::btree_map(key.clone(), 1u64..15, 0..100),
        prop::collection::btree_map(key, 100u64..130, 0..100),
    )
        .prop_map(|(p, s)| (clustering("primary", p), clustering("secondary", s)))
}

/// Per-instance restatement of the three merge steps.
fn naive(primary: &SourceClustering, secondary: &SourceClustering) -> (BTreeMap<InstanceKey, u64>, Vec<ConflictRecord>) {
    let max_primary = primary.assignments.values().max().copied().unwrap_or(0);
    let members = |c: u64| -> Vec<InstanceKey> {
        secondary.assignments.iter().filter(|(_, v)| **v == c).map(|(k, _)| *k).collect()
    };
    let labels = |c: u64| -> Vec<u64> { members(c).iter().filter_map(|k| primary.assignments.get(k).copied()).collect() };

    let clusters: BTreeSet<u64> = secondary.assignments.values().copied().collect();
    let mut unlabeled_minima: Vec<InstanceKey> = clusters
        .iter()
        .filter(|c| labels(**c).is_empty())
        .map(|c| *members(*c).iter().min().unwrap())
        .collect();
    unlabeled_minima.sort();

    let mut out = primary.assignments.clone();
    for (k, c) in &secondary.assignments {
        if primary.assignments.contains_key(k) {
            continue;
        }
        let l = labels(*c);
        let id = if l.is_empty() {
            let min = *members(*c).iter().min().unwrap();
            max_primary + 1 + unlabeled_minima.iter().position(|m| *m == min).unwrap() as u64
        } else {
            let mut best = (0usize, u64::MAX);
            for cand in &l {
                let n = l.iter().filter(|x| *x == cand).count();
                if n > best.0 || (n == best.0 && *cand < best.1) {
                    best = (n, *cand);
                }
            }
            best.1
        };
        out.insert(*k, id);
    }

    let mut conflicts = Vec::new();
    for c in clusters {
        let l = labels(c);
        let distinct: BTreeSet<u64> = l.iter().copied().collect();
        if distinct.len() < 2 {
            continue;
        }
        let present: BTreeMap<u64, usize> = distinct.iter().map(|d| (*d, l.iter().filter(|x| *x == d).count())).collect();
        let m = members(c);
        let first_unlabeled = m.iter().find(|k| !primary.assignments.contains_key(k));
        let resolution = match first_unlabeled {
            Some(k) => out[k],
            None => {
                let top = *present.values().max().unwrap();
                *present.iter().find(|(_, n)| **n == top).unwrap().0
            }
        };
        conflicts.push(ConflictRecord {
            source_b_cluster: c,
            authority_ids_present: present,
            resolution,
            instances_resolved: m.len() - l.len(),
            rule: MAJORITY_RULE.to_string(),
        });
    }
    (out, conflicts)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn merge_equals_naive_oracle((primary, secondary) in sources()) {
        let u = merge_clusterings(&primary, &secondary);
        let (ids, conflicts) = naive(&primary, &secondary);
        prop_assert_eq!(&u.and_id_of, &ids);
        prop_assert_eq!(&u.conflict_log, &conflicts);
        validate_merge(&u, &primary, &secondary).unwrap();
    }

    #[test]
    fn secondary_relabeling_leaves_ids_unchanged((primary, secondary) in sources(), shift in 1u64..1000) {
        let mut relabeled = secondary.clone();
        // order-reversing bijection on cluster IDs
        for v in relabeled.assignments.values_mut() {
            *v = 10_000 + shift - *v;
        }
        let a = merge_clusterings(&primary, &secondary);
        let b = merge_clusterings(&primary, &relabeled);
        prop_assert_eq!(a.and_id_of, b.and_id_of);
        prop_assert_eq!(a.conflict_log.len(), b.conflict_log.len());
    }

    #[test]
    fn merging_the_result_again_is_a_fixed_point((primary, secondary) in sources()) {
        let once = merge_clusterings(&primary, &secondary);
        let twice = merge_clusterings(&once.as_clustering("unified"), &secondary);
        prop_assert_eq!(once.and_id_of, twice.and_id_of);
    }

    #[test]
    fn primary_ids_are_never_overwritten((primary, secondary) in sources()) {
        let u = merge_clusterings(&primary, &secondary);
        for (k, id) in &primary.assignments {
            prop_assert_eq!(u.and_id_of[k], *id);
        }
        for (k, id) in &u.and_id_of {
            if !primary.assignments.contains_key(k) && !primary.assignments.values().any(|p| p == id) {
                prop_assert!(*id >= u.fresh_id_floor);
            }
        }
    }
}

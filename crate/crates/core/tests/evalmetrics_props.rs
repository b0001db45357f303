use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use pubkg::evalmetrics::{
    evaluate, f1, pairwise_metrics, precision, recall, Averaging, Crosswalk, CrosswalkTriple,
};

fn triple(pmid: u64, pi: &str, and_id: u64) -> CrosswalkTriple {
    CrosswalkTriple {
        pmid,
        pi_id: pi.to_string(),
        and_id,
    }
}

fn crosswalk() -> impl Strategy<Value = Crosswalk> {
    prop::collection::btree_set((1u64..400, 0u8..12, 1u64..15), 1..1000)
        .prop_map(|s| s.into_iter().map(|(p, pi, a)| triple(p, &format!("PI{pi:02}"), a)).collect())
}

/// Counts every (id, counterpart) cell by scanning the whole crosswalk.
fn exhaustive(cw: &Crosswalk, by_and: bool) -> (f64, f64) {
    let rows: Vec<(String, String)> = cw
        .iter()
        .map(|t| {
            if by_and {
                (t.and_id.to_string(), t.pi_id.clone())
            } else {
                (t.pi_id.clone(), t.and_id.to_string())
            }
        })
        .collect();
    let ids: BTreeSet<&String> = rows.iter().map(|r| &r.0).collect();
    let (mut num, mut den, mut macro_sum) = (0usize, 0usize, 0.0);
    for id in &ids {
        let mine: Vec<&String> = rows.iter().filter(|r| &&r.0 == id).map(|r| &r.1).collect();
        let best = mine.iter().map(|v| mine.iter().filter(|w| *w == v).count()).max().unwrap();
        num += best;
        den += mine.len();
        macro_sum += best as f64 / mine.len() as f64;
    }
    (num as f64 / den as f64, macro_sum / ids.len() as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn precision_and_recall_match_exhaustive_counts(cw in crosswalk()) {
        let (p_micro, p_macro) = exhaustive(&cw, true);
        let (r_micro, r_macro) = exhaustive(&cw, false);
        prop_assert!((precision(&cw, Averaging::Micro).unwrap().value - p_micro).abs() <= 1e-12);
        prop_assert!((recall(&cw, Averaging::Micro).unwrap().value - r_micro).abs() <= 1e-12);
        prop_assert!((precision(&cw, Averaging::Macro).unwrap().value - p_macro).abs() <= 1e-12);
        prop_assert!((recall(&cw, Averaging::Macro).unwrap().value - r_macro).abs() <= 1e-12);
        let rep = evaluate(&cw, Averaging::Micro).unwrap();
        for v in [rep.precision, rep.recall, rep.f1] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn bijective_relabeling_is_invariant(cw in crosswalk(), offset in 1u64..1000) {
        let relabeled: Crosswalk = cw
            .iter()
            .map(|t| triple(t.pmid, &format!("X{}", t.pi_id.chars().rev().collect::<String>()), 5000 - t.and_id + offset))
            .collect();
        let a = evaluate(&cw, Averaging::Micro).unwrap();
        let b = evaluate(&relabeled, Averaging::Micro).unwrap();
        prop_assert_eq!(a.precision, b.precision);
        prop_assert_eq!(a.recall, b.recall);
        prop_assert_eq!(a.f1, b.f1);
    }

    #[test]
    fn splitting_keeps_precision_and_lowers_recall(n in 2u64..50, cut in 1u64..49) {
        let cut = cut.min(n - 1);
        let perfect: Crosswalk = (0..n).map(|p| triple(p, "PI", 1)).collect();
        let split: Crosswalk = (0..n).map(|p| triple(p, "PI", if p < cut { 1 } else { 2 })).collect();
        let a = evaluate(&perfect, Averaging::Micro).unwrap();
        let b = evaluate(&split, Averaging::Micro).unwrap();
        prop_assert_eq!(a.precision, 1.0);
        prop_assert_eq!(b.precision, 1.0);
        prop_assert!(b.recall < a.recall);
    }

    #[test]
    fn lumping_lowers_precision(n in 1u64..40, m in 1u64..40) {
        let apart: Crosswalk = (0..n).map(|p| triple(p, "A", 1)).chain((0..m).map(|p| triple(1000 + p, "B", 2))).collect();
        let lumped: Crosswalk = (0..n).map(|p| triple(p, "A", 1)).chain((0..m).map(|p| triple(1000 + p, "B", 1))).collect();
        let a = evaluate(&apart, Averaging::Micro).unwrap();
        let b = evaluate(&lumped, Averaging::Micro).unwrap();
        prop_assert!(b.precision < a.precision);
        prop_assert_eq!(b.recall, 1.0);
    }

    #[test]
    fn pairwise_matches_pair_enumeration(
        labels in prop::collection::vec((0u8..4, 0u8..4), 0..=12)
    ) {
        let pred: BTreeMap<usize, u8> = labels.iter().enumerate().map(|(i, l)| (i, l.0)).collect();
        let gold: BTreeMap<usize, u8> = labels.iter().enumerate().map(|(i, l)| (i, l.1)).collect();
        let (mut tp, mut pp, mut gp) = (0u64, 0u64, 0u64);
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                let same_p = pred[&i] == pred[&j];
                let same_g = gold[&i] == gold[&j];
                pp += u64::from(same_p);
                gp += u64::from(same_g);
                tp += u64::from(same_p && same_g);
            }
        }
        let s = pairwise_metrics(&pred, &gold).unwrap();
        prop_assert_eq!((s.true_pairs, s.predicted_pairs, s.gold_pairs), (tp, pp, gp));
        let p = if pp == 0 { 1.0 } else { tp as f64 / pp as f64 };
        let r = if gp == 0 { 1.0 } else { tp as f64 / gp as f64 };
        prop_assert_eq!(s.precision, p);
        prop_assert_eq!(s.recall, r);
        prop_assert!((s.f1 - f1(p, r)).abs() < 1e-15);
    }
}

#[test]
fn perfect_mapping_is_exactly_one() {
    let cw: Crosswalk = (0..30).map(|p| triple(p, &format!("PI{}", p % 5), p % 5 + 1)).collect();
    let r = evaluate(&cw, Averaging::Micro).unwrap();
    assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
}

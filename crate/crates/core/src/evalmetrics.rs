//! Author-disambiguation scores against a PI crosswalk.
//!
//! Precision asks, for each AND_ID, what share of its articles carry its
//! most frequent PI_ID; recall asks the same of each PI_ID with respect to
//! AND_IDs. Both are article-weighted (micro) by default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CrosswalkTriple {
    pub pmid: u64,
    pub pi_id: String,
    pub and_id: u64,
}

pub type Crosswalk = BTreeSet<CrosswalkTriple>;

pub fn write_crosswalk<W: Write>(w: W, crosswalk: &Crosswalk) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
    wtr.write_record(["pmid", "pi_id", "and_id"])?;
    for t in crosswalk {
        wtr.write_record([t.pmid.to_string(), t.pi_id.clone(), t.and_id.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_crosswalk<R: std::io::Read>(r: R) -> Result<Crosswalk, csv::Error> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Averaging {
    /// Article-weighted: sum of modal counts over sum of totals.
    #[default]
    Micro,
    /// Unweighted mean of per-ID ratios.
    Macro,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("metric undefined on an empty crosswalk")]
    EmptyCrosswalk,
    #[error("clusterings cover different instance sets ({only_predicted} only predicted, {only_gold} only gold)")]
    InstanceMismatch { only_predicted: usize, only_gold: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contribution<K, V> {
    pub id: K,
    pub modal: V,
    pub modal_count: usize,
    pub total: usize,
    /// Several counterparts shared the top count; the smallest was taken.
    pub tied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement<K, V> {
    pub value: f64,
    pub contributions: Vec<Contribution<K, V>>,
    pub ties: usize,
}

fn modal_agreement<K, V>(
    pairs: impl IntoIterator<Item = (K, V)>,
    averaging: Averaging,
) -> Result<Agreement<K, V>, EvalError>
where
    K: Ord + Clone,
    V: Ord + Clone,
{
    let mut groups: BTreeMap<K, BTreeMap<V, usize>> = BTreeMap::new();
    for (k, v) in pairs {
        *groups.entry(k).or_default().entry(v).or_default() += 1;
    }
    if groups.is_empty() {
        return Err(EvalError::EmptyCrosswalk);
    }
    let mut contributions = Vec::with_capacity(groups.len());
    let mut ties = 0;
    for (id, counts) in groups {
        let top = *counts.values().max().expect("group non-empty");
        let mut at_top = counts.iter().filter(|(_, c)| **c == top);
        let (modal, _) = at_top.next().expect("max exists");
        let tied = at_top.next().is_some();
        ties += usize::from(tied);
        contributions.push(Contribution {
            id,
            modal: modal.clone(),
            modal_count: top,
            total: counts.values().sum(),
            tied,
        });
    }
    let value = match averaging {
        Averaging::Micro => {
            let num: usize = contributions.iter().map(|c| c.modal_count).sum();
            let den: usize = contributions.iter().map(|c| c.total).sum();
            num as f64 / den as f64
        }
        Averaging::Macro => {
            contributions
                .iter()
                .map(|c| c.modal_count as f64 / c.total as f64)
                .sum::<f64>()
                / contributions.len() as f64
        }
    };
    Ok(Agreement {
        value,
        contributions,
        ties,
    })
}

pub fn precision(crosswalk: &Crosswalk, averaging: Averaging) -> Result<Agreement<u64, String>, EvalError> {
    modal_agreement(crosswalk.iter().map(|t| (t.and_id, t.pi_id.clone())), averaging)
}

pub fn recall(crosswalk: &Crosswalk, averaging: Averaging) -> Result<Agreement<String, u64>, EvalError> {
    modal_agreement(crosswalk.iter().map(|t| (t.pi_id.clone(), t.and_id)), averaging)
}

/// Harmonic mean; 0 when both inputs are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub averaging: Averaging,
    pub per_and_id: Vec<Contribution<u64, String>>,
    pub per_pi_id: Vec<Contribution<String, u64>>,
    pub modal_ties: usize,
    /// Ordered (stage, count) pairs from crosswalk construction.
    pub funnel: Vec<(String, usize)>,
}

pub fn evaluate(crosswalk: &Crosswalk, averaging: Averaging) -> Result<EvalReport, EvalError> {
    let p = precision(crosswalk, averaging)?;
    let r = recall(crosswalk, averaging)?;
    Ok(EvalReport {
        precision: p.value,
        recall: r.value,
        f1: f1(p.value, r.value),
        averaging,
        modal_ties: p.ties + r.ties,
        per_and_id: p.contributions,
        per_pi_id: r.contributions,
        funnel: Vec::new(),
    })
}

impl EvalReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "metric,value")?;
        writeln!(w, "precision,{}", self.precision)?;
        writeln!(w, "recall,{}", self.recall)?;
        writeln!(w, "f1,{}", self.f1)?;
        writeln!(w, "averaging,{}", match self.averaging {
            Averaging::Micro => "micro",
            Averaging::Macro => "macro",
        })?;
        writeln!(w, "modal_ties,{}", self.modal_ties)?;
        for (stage, n) in &self.funnel {
            writeln!(w, "funnel.{stage},{n}")?;
        }
        Ok(())
    }

    pub fn write_contributions_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "side,id,modal_counterpart,modal_count,total,tied")?;
        for c in &self.per_and_id {
            writeln!(w, "AND_ID,{},{},{},{},{}", c.id, c.modal, c.modal_count, c.total, c.tied)?;
        }
        for c in &self.per_pi_id {
            writeln!(w, "PI_ID,{},{},{},{},{}", c.id, c.modal, c.modal_count, c.total, c.tied)?;
        }
        Ok(())
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Precision: {:.4}", self.precision);
        let _ = writeln!(s, "Recall:    {:.4}", self.recall);
        let _ = writeln!(s, "F1:        {:.4}", self.f1);
        let _ = writeln!(s, "AND_IDs: {}  PI_IDs: {}  modal ties: {}", self.per_and_id.len(), self.per_pi_id.len(), self.modal_ties);
        for (stage, n) in &self.funnel {
            let _ = writeln!(s, "  {stage}: {n}");
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pairs: u64,
    pub predicted_pairs: u64,
    pub gold_pairs: u64,
}

fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Pairwise precision/recall over same-cluster instance pairs.
///
/// With no predicted (gold) pairs, precision (recall) is 1.
pub fn pairwise_metrics<K, A, B>(predicted: &BTreeMap<K, A>, gold: &BTreeMap<K, B>) -> Result<PairwiseScores, EvalError>
where
    K: Ord,
    A: Ord,
    B: Ord,
{
    let only_predicted = predicted.keys().filter(|k| !gold.contains_key(k)).count();
    let only_gold = gold.keys().filter(|k| !predicted.contains_key(k)).count();
    if only_predicted + only_gold > 0 {
        return Err(EvalError::InstanceMismatch { only_predicted, only_gold });
    }
    let mut cells: BTreeMap<(&A, &B), u64> = BTreeMap::new();
    let mut pred_sizes: BTreeMap<&A, u64> = BTreeMap::new();
    let mut gold_sizes: BTreeMap<&B, u64> = BTreeMap::new();
    for (k, a) in predicted {
        let b = &gold[k];
        *cells.entry((a, b)).or_default() += 1;
        *pred_sizes.entry(a).or_default() += 1;
        *gold_sizes.entry(b).or_default() += 1;
    }
    let true_pairs: u64 = cells.values().map(|n| pairs(*n)).sum();
    let predicted_pairs: u64 = pred_sizes.values().map(|n| pairs(*n)).sum();
    let gold_pairs: u64 = gold_sizes.values().map(|n| pairs(*n)).sum();
    let precision = if predicted_pairs == 0 { 1.0 } else { true_pairs as f64 / predicted_pairs as f64 };
    let recall = if gold_pairs == 0 { 1.0 } else { true_pairs as f64 / gold_pairs as f64 };
    Ok(PairwiseScores {
        precision,
        recall,
        f1: f1(precision, recall),
        true_pairs,
        predicted_pairs,
        gold_pairs,
    })
}

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{collect_evidence, pi_name_key, CounterpartKind, Corpus, Feature, LinkRecord};
use crate::evalmetrics::{Crosswalk, CrosswalkTriple};
use crate::ingest::{ExporterProjectRow, ExporterPubRow};

/// One PI on one (ProjectNumber, subProjectNumber) record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NihProject {
    pub pi_id: String,
    pub pi_name: String,
    pub project_number: String,
    pub sub_project_number: Option<String>,
    pub pmids: BTreeSet<u64>,
    pub pi_count_on_project: usize,
}

impl NihProject {
    pub fn project_key(&self) -> (&str, Option<&str>) {
        (&self.project_number, self.sub_project_number.as_deref())
    }
}

/// Groups fiscal-year rows into projects and attaches publication links by
/// project number. Rows with an empty project number are dropped. When a
/// PI's name varies across years, the latest year's spelling wins.
pub fn assemble_nih_projects(projects: Vec<ExporterProjectRow>, pubs: Vec<ExporterPubRow>) -> Vec<NihProject> {
    type Key = (String, Option<String>);
    let mut pis: BTreeMap<Key, BTreeMap<String, (Option<i32>, String)>> = BTreeMap::new();
    for p in projects {
        let number = p.project_number.trim().to_string();
        if number.is_empty() {
            continue;
        }
        let sub = p.sub_project_number.map(|s| s.trim().to_string()).filter(|s| !s.is_empty());
        let entry = pis.entry((number, sub)).or_default();
        let name = p.pi_name.trim().to_string();
        entry
            .entry(p.pi_id.trim().to_string())
            .and_modify(|cur| {
                let candidate = (p.fiscal_year, name.clone());
                if (candidate.0, std::cmp::Reverse(&candidate.1)) > (cur.0, std::cmp::Reverse(&cur.1)) {
                    *cur = candidate;
                }
            })
            .or_insert((p.fiscal_year, name));
    }
    let mut pmids: BTreeMap<String, BTreeSet<u64>> = BTreeMap::new();
    for p in pubs {
        pmids.entry(p.project_number.trim().to_string()).or_default().insert(p.pmid);
    }
    let mut out = Vec::new();
    for ((number, sub), by_pi) in pis {
        let linked = pmids.get(&number).cloned().unwrap_or_default();
        let count = by_pi.len();
        for (pi_id, (_, pi_name)) in by_pi {
            out.push(NihProject {
                pi_id,
                pi_name,
                project_number: number.clone(),
                sub_project_number: sub.clone(),
                pmids: linked.clone(),
                pi_count_on_project: count,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NihProjectRow {
    pub project_number: String,
    pub sub_project_number: Option<String>,
    pub pi_id: String,
    pub pmid: u64,
    pub and_id: u64,
    pub pi_name: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NihLinkage {
    /// Ascending by (ProjectNumber, subProjectNumber, PI_ID, PMID).
    pub rows: Vec<NihProjectRow>,
    /// Ascending by PI_ID.
    pub links: Vec<LinkRecord>,
    /// PIs with matched rows but no AND_ID holding a strict majority.
    pub unresolved_pis: Vec<String>,
}

fn unique_and_id(corpus: &Corpus<'_>, pmid: u64, pi_name: &str) -> u64 {
    let Some(key) = pi_name_key(pi_name) else {
        return 0;
    };
    let ids: BTreeSet<u64> = corpus.matching_and_ids(pmid, &key).into_iter().collect();
    match ids.len() {
        1 => *ids.first().expect("one id"),
        _ => 0,
    }
}

pub fn link_nih(projects: &[NihProject], corpus: &Corpus<'_>) -> NihLinkage {
    let mut rows = Vec::new();
    for p in projects {
        for &pmid in p.pmids.iter().filter(|&&m| corpus.contains(m)) {
            rows.push(NihProjectRow {
                project_number: p.project_number.clone(),
                sub_project_number: p.sub_project_number.clone(),
                pi_id: p.pi_id.clone(),
                pmid,
                and_id: unique_and_id(corpus, pmid, &p.pi_name),
                pi_name: p.pi_name.clone(),
            });
        }
    }
    rows.sort();
    rows.dedup();

    let mut per_pi: BTreeMap<&str, BTreeMap<u64, u64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.and_id != 0) {
        per_pi.entry(&r.pi_id).or_default().insert(r.pmid, r.and_id);
    }
    let mut links = Vec::new();
    let mut unresolved_pis = Vec::new();
    for (pi, by_pmid) in per_pi {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for and_id in by_pmid.values() {
            *counts.entry(*and_id).or_default() += 1;
        }
        let (&best, &n) = counts.iter().max_by_key(|(id, n)| (**n, std::cmp::Reverse(**id))).expect("non-empty");
        if n * 2 > by_pmid.len() {
            links.push(LinkRecord {
                and_id: best,
                kind: CounterpartKind::Pi,
                counterpart_id: pi.to_string(),
                evidence: collect_evidence(
                    by_pmid.iter().filter(|(_, a)| **a == best).map(|(pmid, _)| (*pmid, Feature::Name)),
                ),
            });
        } else {
            unresolved_pis.push(pi.to_string());
        }
    }
    NihLinkage {
        rows,
        links,
        unresolved_pis,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NihFunnel {
    pub projects_total: usize,
    pub projects_with_articles: usize,
    pub multi_pi_removed: usize,
    pub projects_retained: usize,
    pub pis_retained: usize,
    pub articles_retained: usize,
    pub crosswalk_articles: usize,
    pub crosswalk_pi_ids: usize,
    pub crosswalk_and_ids: usize,
    /// (article, PI) pairs whose name matched instances with different AND_IDs.
    pub ambiguous_name_matches: usize,
}

impl NihFunnel {
    pub fn stages(&self) -> Vec<(String, usize)> {
        [
            ("projects_total", self.projects_total),
            ("projects_with_articles", self.projects_with_articles),
            ("multi_pi_removed", self.multi_pi_removed),
            ("projects_retained", self.projects_retained),
            ("pis_retained", self.pis_retained),
            ("articles_retained", self.articles_retained),
            ("crosswalk_articles", self.crosswalk_articles),
            ("crosswalk_pi_ids", self.crosswalk_pi_ids),
            ("crosswalk_and_ids", self.crosswalk_and_ids),
            ("ambiguous_name_matches", self.ambiguous_name_matches),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrosswalkBuild {
    pub crosswalk: Crosswalk,
    pub funnel: NihFunnel,
}

/// Drops projects without corpus articles, then multi-PI projects, then
/// joins PI names to author instances on each remaining article.
pub fn build_eval_crosswalk(projects: &[NihProject], corpus: &Corpus<'_>) -> CrosswalkBuild {
    let mut by_key: BTreeMap<(&str, Option<&str>), Vec<&NihProject>> = BTreeMap::new();
    for p in projects {
        by_key.entry(p.project_key()).or_default().push(p);
    }
    let mut funnel = NihFunnel {
        projects_total: by_key.len(),
        ..Default::default()
    };

    let with_articles: Vec<&Vec<&NihProject>> = by_key
        .values()
        .filter(|ps| ps[0].pmids.iter().any(|&m| corpus.contains(m)))
        .collect();
    funnel.projects_with_articles = with_articles.len();

    let retained: Vec<&NihProject> = with_articles
        .iter()
        .filter(|ps| ps.len() == 1 && ps[0].pi_count_on_project == 1)
        .map(|ps| ps[0])
        .collect();
    funnel.multi_pi_removed = funnel.projects_with_articles - retained.len();
    funnel.projects_retained = retained.len();

    let mut pis = BTreeSet::new();
    let mut articles = BTreeSet::new();
    let mut pairs: BTreeSet<(u64, &str, &str)> = BTreeSet::new();
    for p in &retained {
        pis.insert(p.pi_id.as_str());
        for &pmid in p.pmids.iter().filter(|&&m| corpus.contains(m)) {
            articles.insert(pmid);
            pairs.insert((pmid, p.pi_id.as_str(), p.pi_name.as_str()));
        }
    }
    funnel.pis_retained = pis.len();
    funnel.articles_retained = articles.len();

    let mut crosswalk = Crosswalk::new();
    let mut seen_pairs: BTreeMap<(u64, &str), BTreeSet<u64>> = BTreeMap::new();
    for (pmid, pi_id, pi_name) in pairs {
        let Some(key) = pi_name_key(pi_name) else {
            continue;
        };
        let ids: BTreeSet<u64> = corpus.matching_and_ids(pmid, &key).into_iter().collect();
        seen_pairs.entry((pmid, pi_id)).or_default().extend(ids);
    }
    for ((pmid, pi_id), ids) in seen_pairs {
        match ids.len() {
            0 => {}
            1 => {
                let and_id = *ids.first().expect("one id");
                if and_id != 0 {
                    crosswalk.insert(CrosswalkTriple {
                        pmid,
                        pi_id: pi_id.to_string(),
                        and_id,
                    });
                }
            }
            _ => funnel.ambiguous_name_matches += 1,
        }
    }
    funnel.crosswalk_articles = crosswalk.iter().map(|t| t.pmid).collect::<BTreeSet<_>>().len();
    funnel.crosswalk_pi_ids = crosswalk.iter().map(|t| t.pi_id.as_str()).collect::<BTreeSet<_>>().len();
    funnel.crosswalk_and_ids = crosswalk.iter().map(|t| t.and_id).collect::<BTreeSet<_>>().len();
    CrosswalkBuild { crosswalk, funnel }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ArticleRecord, AuthorInstance, Citation, InstanceKey};

    fn citation(pmid: u64, authors: &[(&str, &str)]) -> Citation {
        Citation {
            article: ArticleRecord {
                pmid,
                pub_year: Some(2010),
                journal: "J".into(),
                title: format!("T{pmid}"),
                doi: None,
                abstract_text: None,
            },
            authors: authors
                .iter()
                .enumerate()
                .map(|(i, (l, ini))| AuthorInstance {
                    pmid,
                    au_order: i as u32 + 1,
                    last_name: Some(l.to_string()),
                    fore_name: None,
                    initials: Some(ini.to_string()),
                    suffix: None,
                    affiliation_strings: vec![],
                })
                .collect(),
        }
    }

    fn prow(pi: &str, name: &str, number: &str) -> ExporterProjectRow {
        ExporterProjectRow {
            pi_id: pi.into(),
            pi_name: name.into(),
            project_number: number.into(),
            sub_project_number: None,
            fiscal_year: Some(2010),
        }
    }

    fn pubrow(pmid: u64, number: &str) -> ExporterPubRow {
        ExporterPubRow { pmid, project_number: number.into() }
    }

    #[test]
    fn funnel_three_two_one() {
        let cits = vec![citation(10, &[("Smith", "J")]), citation(11, &[("Doe", "A"), ("Roe", "B")])];
        let ids: BTreeMap<InstanceKey, u64> =
            [(InstanceKey::new(10, 1), 1), (InstanceKey::new(11, 1), 2), (InstanceKey::new(11, 2), 3)].into();
        let corpus = Corpus::new(&cits, &ids);
        let projects = assemble_nih_projects(
            vec![
                prow("P1", "SMITH, JOHN", "R01-A"),
                prow("P2", "NOBODY, X", "R01-B"),
                prow("P3", "DOE, ANN", "R01-C"),
                prow("P4", "ROE, BOB", "R01-C"),
            ],
            vec![pubrow(10, "R01-A"), pubrow(999, "R01-B"), pubrow(11, "R01-C")],
        );
        let b = build_eval_crosswalk(&projects, &corpus);
        assert_eq!((b.funnel.projects_total, b.funnel.projects_with_articles, b.funnel.projects_retained), (3, 2, 1));
        assert_eq!(b.funnel.multi_pi_removed, 1);
        assert_eq!(b.crosswalk.len(), 1);
        let t = b.crosswalk.first().unwrap();
        assert_eq!((t.pmid, t.pi_id.as_str(), t.and_id), (10, "P1", 1));
    }

    #[test]
    fn rows_and_links() {
        let cits = vec![
            citation(10, &[("Smith", "J")]),
            citation(11, &[("Jones", "K")]),
            citation(12, &[("Smith", "JA")]),
        ];
        let ids: BTreeMap<InstanceKey, u64> =
            [(InstanceKey::new(10, 1), 4), (InstanceKey::new(11, 1), 5), (InstanceKey::new(12, 1), 4)].into();
        let corpus = Corpus::new(&cits, &ids);
        let projects = assemble_nih_projects(
            vec![prow("P1", "SMITH, JOHN", "R01")],
            vec![pubrow(10, "R01"), pubrow(11, "R01"), pubrow(12, "R01"), pubrow(13, "R01")],
        );
        let out = link_nih(&projects, &corpus);
        let got: Vec<(u64, u64)> = out.rows.iter().map(|r| (r.pmid, r.and_id)).collect();
        assert_eq!(got, vec![(10, 4), (11, 0), (12, 4)]);
        assert_eq!(out.links.len(), 1);
        assert_eq!(out.links[0].and_id, 4);
        assert_eq!(out.links[0].evidence.len(), 2);
    }

    #[test]
    fn project_without_corpus_articles_has_no_rows() {
        let cits = vec![citation(10, &[("Smith", "J")])];
        let ids = BTreeMap::new();
        let corpus = Corpus::new(&cits, &ids);
        let projects = assemble_nih_projects(vec![prow("P1", "SMITH, JOHN", "R01")], vec![pubrow(99, "R01")]);
        assert!(link_nih(&projects, &corpus).rows.is_empty());
    }

    #[test]
    fn split_pi_has_no_majority() {
        let cits = vec![citation(10, &[("Smith", "J")]), citation(11, &[("Smith", "J")])];
        let ids: BTreeMap<InstanceKey, u64> = [(InstanceKey::new(10, 1), 4), (InstanceKey::new(11, 1), 5)].into();
        let corpus = Corpus::new(&cits, &ids);
        let projects = assemble_nih_projects(vec![prow("P1", "SMITH, J", "R01")], vec![pubrow(10, "R01"), pubrow(11, "R01")]);
        let out = link_nih(&projects, &corpus);
        assert!(out.links.is_empty());
        assert_eq!(out.unresolved_pis, vec!["P1".to_string()]);
    }
}

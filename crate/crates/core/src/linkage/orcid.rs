use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{collect_evidence, name_key, CounterpartKind, Corpus, Feature, LinkRecord};
use crate::ingest::{OrcidAffiliationRow, OrcidPersonRow, OrcidWorkRow};

const PLAUSIBLE_YEARS: std::ops::RangeInclusive<i32> = 1900..=2100;

/// Validates the `xxxx-xxxx-xxxx-xxxC` layout and the ISO 7064 mod 11-2
/// check character.
pub fn orcid_checksum_valid(id: &str) -> bool {
    let b = id.as_bytes();
    if b.len() != 19 || [4, 9, 14].iter().any(|&i| b[i] != b'-') {
        return false;
    }
    let mut total: u32 = 0;
    let mut digits = 0;
    for (i, &c) in b[..18].iter().enumerate() {
        if [4, 9, 14].contains(&i) {
            continue;
        }
        if !c.is_ascii_digit() {
            return false;
        }
        total = (total + u32::from(c - b'0')) * 2;
        digits += 1;
    }
    debug_assert_eq!(digits, 15);
    let check = (12 - total % 11) % 11;
    let expected = if check == 10 { b'X' } else { b'0' + check as u8 };
    b[18] == expected
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidWork {
    pub doi: Option<String>,
    pub title: Option<String>,
    pub journal: Option<String>,
    pub pub_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidRecord {
    pub orcid_id: String,
    pub family_name: Option<String>,
    pub given_name: Option<String>,
    pub works: Vec<OrcidWork>,
    pub employments: Vec<OrcidAffiliationRow>,
    pub educations: Vec<OrcidAffiliationRow>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrcidAssembly {
    /// Ascending by ORCID iD.
    pub records: Vec<OrcidRecord>,
    pub invalid_ids: BTreeSet<String>,
    /// Rows whose ORCID iD has no person row.
    pub orphan_rows: usize,
    /// Years outside the plausible range, cleared to absent.
    pub implausible_years: usize,
}

fn plausible(year: &mut Option<i32>, bad: &mut usize) {
    if year.is_some_and(|y| !PLAUSIBLE_YEARS.contains(&y)) {
        *year = None;
        *bad += 1;
    }
}

pub fn assemble_orcid_records(
    persons: Vec<OrcidPersonRow>,
    works: Vec<OrcidWorkRow>,
    employments: Vec<OrcidAffiliationRow>,
    educations: Vec<OrcidAffiliationRow>,
) -> OrcidAssembly {
    let mut out = OrcidAssembly::default();
    let mut records: BTreeMap<String, OrcidRecord> = BTreeMap::new();
    for p in persons {
        let id = p.orcid.trim().to_string();
        if !orcid_checksum_valid(&id) {
            out.invalid_ids.insert(id);
            continue;
        }
        records.entry(id.clone()).or_insert(OrcidRecord {
            orcid_id: id,
            family_name: p.family_name,
            given_name: p.given_name,
            works: Vec::new(),
            employments: Vec::new(),
            educations: Vec::new(),
        });
    }
    for mut w in works {
        let Some(r) = records.get_mut(w.orcid.trim()) else {
            out.orphan_rows += 1;
            continue;
        };
        plausible(&mut w.pub_year, &mut out.implausible_years);
        r.works.push(OrcidWork {
            doi: w.doi,
            title: w.title,
            journal: w.journal,
            pub_year: w.pub_year,
        });
    }
    for (rows, employment) in [(employments, true), (educations, false)] {
        for mut row in rows {
            let Some(r) = records.get_mut(row.orcid.trim()) else {
                out.orphan_rows += 1;
                continue;
            };
            plausible(&mut row.begin_year, &mut out.implausible_years);
            plausible(&mut row.end_year, &mut out.implausible_years);
            if employment {
                r.employments.push(row);
            } else {
                r.educations.push(row);
            }
        }
    }
    out.records = records.into_values().collect();
    out
}

/// A candidate pairing rejected because one side has several candidates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ambiguity {
    pub and_id: u64,
    pub orcid_id: String,
    pub orcids_for_and_id: usize,
    pub and_ids_for_orcid: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrcidLinkage {
    /// Ascending by AND_ID.
    pub links: Vec<LinkRecord>,
    pub ambiguities: Vec<Ambiguity>,
}

/// Links on DOI + name, then on title + journal + name for articles
/// without a DOI, keeping only mutually unique (AND_ID, ORCID) pairs.
pub fn link_orcid(corpus: &Corpus<'_>, records: &[OrcidRecord]) -> OrcidLinkage {
    let candidates: Vec<((u64, String), u64, Feature)> = records
        .par_iter()
        .flat_map_iter(|r| {
            let mut found = Vec::new();
            let Some(key) = name_key(r.family_name.as_deref().unwrap_or(""), r.given_name.as_deref().unwrap_or(""))
            else {
                return found;
            };
            for w in &r.works {
                if let Some(doi) = w.doi.as_deref().filter(|d| !d.trim().is_empty()) {
                    for &pmid in corpus.pmids_by_doi(doi) {
                        for and_id in corpus.matching_and_ids(pmid, &key) {
                            if and_id != 0 {
                                let k = (and_id, r.orcid_id.clone());
                                found.push((k.clone(), pmid, Feature::Doi));
                                found.push((k, pmid, Feature::Name));
                            }
                        }
                    }
                }
                if let (Some(title), Some(journal)) = (w.title.as_deref(), w.journal.as_deref()) {
                    for &pmid in corpus.pmids_without_doi_by_title(title, journal) {
                        for and_id in corpus.matching_and_ids(pmid, &key) {
                            if and_id != 0 {
                                let k = (and_id, r.orcid_id.clone());
                                for f in [Feature::Title, Feature::Journal, Feature::Name] {
                                    found.push((k.clone(), pmid, f));
                                }
                            }
                        }
                    }
                }
            }
            found
        })
        .collect();

    let mut groups: BTreeMap<(u64, String), Vec<(u64, Feature)>> = BTreeMap::new();
    for (k, pmid, f) in candidates {
        groups.entry(k).or_default().push((pmid, f));
    }
    let mut per_and: BTreeMap<u64, usize> = BTreeMap::new();
    let mut per_orcid: BTreeMap<&str, usize> = BTreeMap::new();
    for (and_id, orcid) in groups.keys() {
        *per_and.entry(*and_id).or_default() += 1;
        *per_orcid.entry(orcid.as_str()).or_default() += 1;
    }
    let mut out = OrcidLinkage::default();
    for ((and_id, orcid), items) in &groups {
        let (a, o) = (per_and[and_id], per_orcid[orcid.as_str()]);
        if a == 1 && o == 1 {
            out.links.push(LinkRecord {
                and_id: *and_id,
                kind: CounterpartKind::Orcid,
                counterpart_id: orcid.clone(),
                evidence: collect_evidence(items.iter().copied()),
            });
        } else {
            out.ambiguities.push(Ambiguity {
                and_id: *and_id,
                orcid_id: orcid.clone(),
                orcids_for_and_id: a,
                and_ids_for_orcid: o,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ArticleRecord, AuthorInstance, Citation, InstanceKey};

    fn citation(pmid: u64, doi: Option<&str>, title: &str, authors: &[(&str, &str)]) -> Citation {
        Citation {
            article: ArticleRecord {
                pmid,
                pub_year: Some(2015),
                journal: "J Test".into(),
                title: title.into(),
                doi: doi.map(Into::into),
                abstract_text: None,
            },
            authors: authors
                .iter()
                .enumerate()
                .map(|(i, (last, fore))| AuthorInstance {
                    pmid,
                    au_order: i as u32 + 1,
                    last_name: Some(last.to_string()),
                    fore_name: Some(fore.to_string()),
                    initials: None,
                    suffix: None,
                    affiliation_strings: vec![],
                })
                .collect(),
        }
    }

    fn record(id: &str, family: &str, given: &str, works: Vec<OrcidWork>) -> OrcidRecord {
        OrcidRecord {
            orcid_id: id.into(),
            family_name: Some(family.into()),
            given_name: Some(given.into()),
            works,
            employments: vec![],
            educations: vec![],
        }
    }

    fn work(doi: Option<&str>, title: &str) -> OrcidWork {
        OrcidWork {
            doi: doi.map(Into::into),
            title: Some(title.into()),
            journal: Some("J TEST".into()),
            pub_year: Some(2015),
        }
    }

    #[test]
    fn checksum_examples() {
        assert!(orcid_checksum_valid("0000-0002-1825-0097"));
        assert!(orcid_checksum_valid("0000-0002-1694-233X"));
        assert!(!orcid_checksum_valid("0000-0002-1825-0098"));
        assert!(!orcid_checksum_valid("0000000218250097"));
        assert!(!orcid_checksum_valid("0000-0002-1825-009"));
    }

    #[test]
    fn doi_and_name_give_one_link() {
        let cits = vec![citation(1, Some("10.1/ABC"), "A title", &[("Carberry", "Josiah")])];
        let ids: BTreeMap<InstanceKey, u64> = [(InstanceKey::new(1, 1), 77)].into();
        let corpus = Corpus::new(&cits, &ids);
        let rs = vec![record("0000-0002-1825-0097", "Carberry", "J", vec![work(Some("https://doi.org/10.1/abc"), "x")])];
        let out = link_orcid(&corpus, &rs);
        assert_eq!(out.links.len(), 1);
        assert_eq!(out.links[0].and_id, 77);
        assert_eq!(out.links[0].evidence.len(), 1);
        assert_eq!(out.links[0].evidence[0].features, [Feature::Doi, Feature::Name].into());
    }

    #[test]
    fn title_journal_fallback_without_doi() {
        let cits = vec![citation(2, None, "Rat models, revisited.", &[("Lee", "Ann")])];
        let ids: BTreeMap<InstanceKey, u64> = [(InstanceKey::new(2, 1), 5)].into();
        let corpus = Corpus::new(&cits, &ids);
        let rs = vec![record("0000-0002-1694-233X", "LEE", "A.", vec![work(None, "rat models revisited")])];
        let out = link_orcid(&corpus, &rs);
        assert_eq!(out.links.len(), 1);
        assert!(out.links[0].evidence[0].features.contains(&Feature::Title));
    }

    #[test]
    fn two_orcids_for_one_author_are_not_linked() {
        let cits = vec![citation(1, Some("10.1/x"), "t", &[("Kim", "Min")])];
        let ids: BTreeMap<InstanceKey, u64> = [(InstanceKey::new(1, 1), 9)].into();
        let corpus = Corpus::new(&cits, &ids);
        let rs = vec![
            record("0000-0002-1825-0097", "Kim", "M", vec![work(Some("10.1/x"), "t")]),
            record("0000-0002-1694-233X", "Kim", "Min", vec![work(Some("10.1/x"), "t")]),
        ];
        let out = link_orcid(&corpus, &rs);
        assert!(out.links.is_empty());
        assert_eq!(out.ambiguities.len(), 2);
        assert!(out.ambiguities.iter().all(|a| a.orcids_for_and_id == 2));
    }

    #[test]
    fn and_id_zero_is_never_linked() {
        let cits = vec![citation(1, Some("10.1/x"), "t", &[("Kim", "Min")])];
        let ids = BTreeMap::new();
        let corpus = Corpus::new(&cits, &ids);
        let rs = vec![record("0000-0002-1825-0097", "Kim", "M", vec![work(Some("10.1/x"), "t")])];
        assert!(link_orcid(&corpus, &rs).links.is_empty());
    }

    #[test]
    fn assembly_skips_invalid_and_clears_bad_years() {
        let persons = vec![
            OrcidPersonRow { orcid: "0000-0002-1825-0097".into(), family_name: Some("A".into()), given_name: None },
            OrcidPersonRow { orcid: "0000-0002-1825-0098".into(), family_name: Some("B".into()), given_name: None },
        ];
        let works = vec![OrcidWorkRow {
            orcid: "0000-0002-1825-0097".into(),
            doi: None,
            title: None,
            journal: None,
            pub_year: Some(3010),
        }];
        let asm = assemble_orcid_records(persons, works, vec![], vec![]);
        assert_eq!(asm.records.len(), 1);
        assert_eq!(asm.invalid_ids.len(), 1);
        assert_eq!(asm.implausible_years, 1);
        assert_eq!(asm.records[0].works[0].pub_year, None);
    }
}

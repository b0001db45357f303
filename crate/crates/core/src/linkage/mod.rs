//! Linking unified authors to ORCID records and NIH ExPORTER projects.

mod names;
mod nih;
mod orcid;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::ingest::{Citation, InstanceKey};
use crate::text::title_key;

pub use names::{author_name_key, name_key, pi_name_key, NameKey};
pub use nih::{
    assemble_nih_projects, build_eval_crosswalk, link_nih, CrosswalkBuild, NihFunnel, NihLinkage,
    NihProject, NihProjectRow,
};
pub use orcid::{
    assemble_orcid_records, link_orcid, orcid_checksum_valid, Ambiguity, OrcidAssembly, OrcidLinkage,
    OrcidRecord, OrcidWork,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    Doi,
    Title,
    Journal,
    Name,
}

impl Feature {
    pub fn as_str(self) -> &'static str {
        match self {
            Feature::Doi => "doi",
            Feature::Title => "title",
            Feature::Journal => "journal",
            Feature::Name => "name",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CounterpartKind {
    Orcid,
    Pi,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Evidence {
    pub pmid: u64,
    pub features: BTreeSet<Feature>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkRecord {
    pub and_id: u64,
    pub kind: CounterpartKind,
    pub counterpart_id: String,
    /// Ascending by PMID, one entry per PMID.
    pub evidence: Vec<Evidence>,
}

pub fn write_links<W: Write>(mut w: W, links: &[LinkRecord]) -> std::io::Result<()> {
    writeln!(w, "and_id,kind,counterpart_id,pmid,features")?;
    for l in links {
        let kind = match l.kind {
            CounterpartKind::Orcid => "ORCID",
            CounterpartKind::Pi => "PI",
        };
        for e in &l.evidence {
            let features: Vec<&str> = e.features.iter().map(|f| f.as_str()).collect();
            writeln!(w, "{},{},{},{},{}", l.and_id, kind, l.counterpart_id, e.pmid, features.join(";"))?;
        }
    }
    Ok(())
}

/// Read-only index over the corpus and its AND_IDs shared by the linkers.
pub struct Corpus<'a> {
    citations: &'a [Citation],
    and_ids: &'a BTreeMap<InstanceKey, u64>,
    by_pmid: HashMap<u64, usize>,
    by_doi: HashMap<String, Vec<u64>>,
    by_title_journal: HashMap<(String, String), Vec<u64>>,
}

pub fn doi_key(doi: &str) -> String {
    let d = doi.trim().to_lowercase();
    for prefix in ["https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:"] {
        if let Some(rest) = d.strip_prefix(prefix) {
            return rest.trim().to_string();
        }
    }
    d
}

impl<'a> Corpus<'a> {
    pub fn new(citations: &'a [Citation], and_ids: &'a BTreeMap<InstanceKey, u64>) -> Self {
        let mut by_pmid = HashMap::with_capacity(citations.len());
        let mut by_doi: HashMap<String, Vec<u64>> = HashMap::new();
        let mut by_title_journal: HashMap<(String, String), Vec<u64>> = HashMap::new();
        for (i, c) in citations.iter().enumerate() {
            let a = &c.article;
            by_pmid.insert(a.pmid, i);
            match a.doi.as_deref().map(doi_key).filter(|d| !d.is_empty()) {
                Some(d) => by_doi.entry(d).or_default().push(a.pmid),
                None => {
                    let key = (title_key(&a.title), title_key(&a.journal));
                    if !key.0.is_empty() {
                        by_title_journal.entry(key).or_default().push(a.pmid);
                    }
                }
            }
        }
        Corpus {
            citations,
            and_ids,
            by_pmid,
            by_doi,
            by_title_journal,
        }
    }

    pub fn citation(&self, pmid: u64) -> Option<&'a Citation> {
        self.by_pmid.get(&pmid).map(|&i| &self.citations[i])
    }

    pub fn contains(&self, pmid: u64) -> bool {
        self.by_pmid.contains_key(&pmid)
    }

    pub fn and_id(&self, key: InstanceKey) -> u64 {
        self.and_ids.get(&key).copied().unwrap_or(0)
    }

    pub fn pmids_by_doi(&self, doi: &str) -> &[u64] {
        self.by_doi.get(&doi_key(doi)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn pmids_without_doi_by_title(&self, title: &str, journal: &str) -> &[u64] {
        self.by_title_journal
            .get(&(title_key(title), title_key(journal)))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// AND_IDs of the instances on `pmid` whose name key equals `key`.
    pub fn matching_and_ids(&self, pmid: u64, key: &NameKey) -> Vec<u64> {
        let Some(c) = self.citation(pmid) else {
            return Vec::new();
        };
        c.authors
            .iter()
            .filter(|a| author_name_key(a).as_ref() == Some(key))
            .map(|a| self.and_id(a.key()))
            .collect()
    }
}

fn collect_evidence(items: impl IntoIterator<Item = (u64, Feature)>) -> Vec<Evidence> {
    let mut by_pmid: BTreeMap<u64, BTreeSet<Feature>> = BTreeMap::new();
    for (pmid, f) in items {
        by_pmid.entry(pmid).or_default().insert(f);
    }
    by_pmid
        .into_iter()
        .map(|(pmid, features)| Evidence { pmid, features })
        .collect()
}

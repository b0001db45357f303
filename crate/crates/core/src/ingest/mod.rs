//! Citation XML and upstream source-file ingest.

mod clustering;
mod tabular;
mod xml;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use clustering::{load_clustering, read_clustering, write_clustering, SourceClustering};
pub use tabular::{
    load_tabular, load_tabular_source, read_tabular, write_tabular, ExporterProjectRow,
    ExporterPubRow, GazetteerRow, OrcidAffiliationRow, OrcidPersonRow, OrcidWorkRow,
    SchemaName, TabularRecord, TabularRows,
};
pub use xml::{parse_citation_xml, CitationReader, ParseReport};

/// Identifies one author instance: the `au_order`-th author of article `pmid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InstanceKey {
    pub pmid: u64,
    pub au_order: u32,
}

impl InstanceKey {
    pub fn new(pmid: u64, au_order: u32) -> Self {
        Self { pmid, au_order }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArticleRecord {
    pub pmid: u64,
    pub pub_year: Option<i32>,
    pub journal: String,
    pub title: String,
    pub doi: Option<String>,
    #[serde(rename = "abstract")]
    pub abstract_text: Option<String>,
}

/// One occurrence of an author name on an article.
///
/// Collective (group) authors carry no name fields and never take part in
/// name-based linkage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorInstance {
    pub pmid: u64,
    pub au_order: u32,
    pub last_name: Option<String>,
    pub fore_name: Option<String>,
    pub initials: Option<String>,
    pub suffix: Option<String>,
    pub affiliation_strings: Vec<String>,
}

impl AuthorInstance {
    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(self.pmid, self.au_order)
    }

    pub fn is_collective(&self) -> bool {
        self.last_name.is_none()
    }
}

/// An article together with its author list, as produced by the parser.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Citation {
    pub article: ArticleRecord,
    pub authors: Vec<AuthorInstance>,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
    #[error("{origin}:{line}: duplicate instance key ({pmid}, {au_order})")]
    DuplicateKey {
        origin: String,
        line: usize,
        pmid: u64,
        au_order: u32,
    },
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("{origin}: header does not match schema `{schema}` (missing: [{}], extra: [{}]{})",
        missing.join(", "), extra.join(", "),
        if *order_only { ", columns out of order" } else { "" })]
    Schema {
        origin: String,
        schema: &'static str,
        missing: Vec<String>,
        extra: Vec<String>,
        order_only: bool,
    },
    #[error("unknown tabular schema `{0}`")]
    UnknownSchema(String),
    #[error("{origin}: {source}")]
    Csv {
        origin: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

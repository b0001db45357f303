//! Affiliation string parsing, type classification, geocoding and
//! post-cutoff affiliation succession.

mod gazetteer;
mod inherit;
mod parser;
mod tables;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::IngestError;

pub use gazetteer::{geocode, Gazetteer, GazetteerEntry, GeocodeOutcome, GeocodeStats};
pub use inherit::{inherit_affiliations, InheritanceReport};
pub use parser::{MAILBOX, classify_affiliation_type, parse_affiliation, AffiliationParser};
pub use tables::{match_key, CountryTable, KeywordTables, StateTable, TermSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum AffiliationType {
    #[serde(rename = "COM")]
    Com,
    #[serde(rename = "EDU")]
    Edu,
    #[serde(rename = "EDU-HOS")]
    EduHos,
    #[serde(rename = "GOV")]
    Gov,
    #[serde(rename = "HOS")]
    Hos,
    #[serde(rename = "MIL")]
    Mil,
    #[serde(rename = "ORG")]
    Org,
    #[default]
    #[serde(rename = "UNK")]
    Unk,
}

impl AffiliationType {
    pub const ALL: [AffiliationType; 8] = [
        AffiliationType::Com,
        AffiliationType::Edu,
        AffiliationType::EduHos,
        AffiliationType::Gov,
        AffiliationType::Hos,
        AffiliationType::Mil,
        AffiliationType::Org,
        AffiliationType::Unk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AffiliationType::Com => "COM",
            AffiliationType::Edu => "EDU",
            AffiliationType::EduHos => "EDU-HOS",
            AffiliationType::Gov => "GOV",
            AffiliationType::Hos => "HOS",
            AffiliationType::Mil => "MIL",
            AffiliationType::Org => "ORG",
            AffiliationType::Unk => "UNK",
        }
    }
}

impl std::fmt::Display for AffiliationType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for AffiliationType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AffiliationType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown affiliation type `{s}`"))
    }
}

/// Fine-grained fields extracted from one affiliation string.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffiliationFields {
    pub department: Option<String>,
    pub institution: Option<String>,
    pub email: Option<String>,
    pub zip_code: Option<String>,
    pub location: Option<String>,
    pub country: Option<String>,
    pub city: Option<String>,
    pub state: Option<String>,
    pub affiliation_type: AffiliationType,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub fips: Option<u32>,
}

impl AffiliationFields {
    /// True when any textual fine-grained field is present.
    pub fn has_fields(&self) -> bool {
        [
            &self.department,
            &self.institution,
            &self.email,
            &self.zip_code,
            &self.location,
            &self.country,
            &self.city,
            &self.state,
        ]
        .iter()
        .any(|f| f.is_some())
    }

    /// Copies every field of `src` into the corresponding empty slot of
    /// `self`. Present values are never replaced.
    pub fn fill_from(&mut self, src: &AffiliationFields) {
        fn fill<T: Clone>(dst: &mut Option<T>, src: &Option<T>) {
            if dst.is_none() {
                dst.clone_from(src);
            }
        }
        fill(&mut self.department, &src.department);
        fill(&mut self.institution, &src.institution);
        fill(&mut self.email, &src.email);
        fill(&mut self.zip_code, &src.zip_code);
        fill(&mut self.location, &src.location);
        fill(&mut self.country, &src.country);
        fill(&mut self.city, &src.city);
        fill(&mut self.state, &src.state);
        if self.affiliation_type == AffiliationType::Unk {
            self.affiliation_type = src.affiliation_type;
        }
        if self.latitude.is_none() && self.longitude.is_none() {
            self.latitude = src.latitude;
            self.longitude = src.longitude;
        }
        fill(&mut self.fips, &src.fips);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsedAffiliation {
    pub pmid: u64,
    pub au_order: u32,
    pub and_id: Option<u64>,
    pub affiliation_order: u32,
    pub pub_year: Option<i32>,
    pub raw: String,
    #[serde(flatten)]
    pub fields: AffiliationFields,
    pub inherited: bool,
}

#[derive(Debug, Error)]
pub enum AffilError {
    #[error("{origin}:{line}: {message}")]
    Table {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("gazetteer line {line}: {message}")]
    Gazetteer { line: usize, message: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

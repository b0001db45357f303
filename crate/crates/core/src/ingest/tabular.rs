//! Comma-separated upstream extracts (ExPORTER, ORCID, gazetteer).
//!
//! Every file carries a header row that must equal the schema's column
//! list exactly. Empty fields deserialize to `None`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemaName {
    ExporterProjects,
    ExporterPubs,
    OrcidPerson,
    OrcidWorks,
    OrcidEmployment,
    OrcidEducation,
    Gazetteer,
}

const ORCID_AFFILIATION_COLUMNS: &[&str] = &[
    "ORCID",
    "Organization",
    "Department",
    "City",
    "Region",
    "Country",
    "BeginYear",
    "EndYear",
    "Role",
    "Identifier",
    "IdSource",
];

impl SchemaName {
    pub const ALL: [SchemaName; 7] = [
        SchemaName::ExporterProjects,
        SchemaName::ExporterPubs,
        SchemaName::OrcidPerson,
        SchemaName::OrcidWorks,
        SchemaName::OrcidEmployment,
        SchemaName::OrcidEducation,
        SchemaName::Gazetteer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemaName::ExporterProjects => "exporter_projects",
            SchemaName::ExporterPubs => "exporter_pubs",
            SchemaName::OrcidPerson => "orcid_person",
            SchemaName::OrcidWorks => "orcid_works",
            SchemaName::OrcidEmployment => "orcid_employment",
            SchemaName::OrcidEducation => "orcid_education",
            SchemaName::Gazetteer => "gazetteer",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            SchemaName::ExporterProjects => &[
                "PI_ID",
                "PI_Name",
                "ProjectNumber",
                "subProjectNumber",
                "FiscalYear",
            ],
            SchemaName::ExporterPubs => &["PMID", "ProjectNumber"],
            SchemaName::OrcidPerson => &["ORCID", "FamilyName", "GivenName"],
            SchemaName::OrcidWorks => &["ORCID", "DOI", "Title", "Journal", "PubYear"],
            SchemaName::OrcidEmployment | SchemaName::OrcidEducation => ORCID_AFFILIATION_COLUMNS,
            SchemaName::Gazetteer => &["city", "state", "country", "latitude", "longitude", "fips"],
        }
    }
}

impl std::str::FromStr for SchemaName {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemaName::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| IngestError::UnknownSchema(s.to_string()))
    }
}

/// Marker for row types that can be loaded from a tabular source.
pub trait TabularRecord: Serialize + DeserializeOwned {}

/// One (project, PI) row. Multi-PI projects appear as several rows sharing
/// `ProjectNumber`/`subProjectNumber`; repeated fiscal years are repeated rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExporterProjectRow {
    #[serde(rename = "PI_ID")]
    pub pi_id: String,
    #[serde(rename = "PI_Name")]
    pub pi_name: String,
    #[serde(rename = "ProjectNumber")]
    pub project_number: String,
    #[serde(rename = "subProjectNumber")]
    pub sub_project_number: Option<String>,
    #[serde(rename = "FiscalYear")]
    pub fiscal_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExporterPubRow {
    #[serde(rename = "PMID")]
    pub pmid: u64,
    #[serde(rename = "ProjectNumber")]
    pub project_number: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidPersonRow {
    #[serde(rename = "ORCID")]
    pub orcid: String,
    #[serde(rename = "FamilyName")]
    pub family_name: Option<String>,
    #[serde(rename = "GivenName")]
    pub given_name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidWorkRow {
    #[serde(rename = "ORCID")]
    pub orcid: String,
    #[serde(rename = "DOI")]
    pub doi: Option<String>,
    #[serde(rename = "Title")]
    pub title: Option<String>,
    #[serde(rename = "Journal")]
    pub journal: Option<String>,
    #[serde(rename = "PubYear")]
    pub pub_year: Option<i32>,
}

/// Employment or education entry; both extracts share this layout.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrcidAffiliationRow {
    #[serde(rename = "ORCID")]
    pub orcid: String,
    #[serde(rename = "Organization")]
    pub organization: String,
    #[serde(rename = "Department")]
    pub department: Option<String>,
    #[serde(rename = "City")]
    pub city: Option<String>,
    #[serde(rename = "Region")]
    pub region: Option<String>,
    #[serde(rename = "Country")]
    pub country: Option<String>,
    #[serde(rename = "BeginYear")]
    pub begin_year: Option<i32>,
    #[serde(rename = "EndYear")]
    pub end_year: Option<i32>,
    #[serde(rename = "Role")]
    pub role: Option<String>,
    #[serde(rename = "Identifier")]
    pub identifier: Option<String>,
    #[serde(rename = "IdSource")]
    pub id_source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerRow {
    pub city: String,
    pub state: Option<String>,
    pub country: String,
    pub latitude: f64,
    pub longitude: f64,
    pub fips: Option<u32>,
}

impl TabularRecord for ExporterProjectRow {}
impl TabularRecord for ExporterPubRow {}
impl TabularRecord for OrcidPersonRow {}
impl TabularRecord for OrcidWorkRow {}
impl TabularRecord for OrcidAffiliationRow {}
impl TabularRecord for GazetteerRow {}

/// Rows of any supported schema, as returned by [`load_tabular_source`].
#[derive(Debug, Clone, PartialEq)]
pub enum TabularRows {
    ExporterProjects(Vec<ExporterProjectRow>),
    ExporterPubs(Vec<ExporterPubRow>),
    OrcidPerson(Vec<OrcidPersonRow>),
    OrcidWorks(Vec<OrcidWorkRow>),
    OrcidEmployment(Vec<OrcidAffiliationRow>),
    OrcidEducation(Vec<OrcidAffiliationRow>),
    Gazetteer(Vec<GazetteerRow>),
}

impl TabularRows {
    pub fn len(&self) -> usize {
        match self {
            TabularRows::ExporterProjects(v) => v.len(),
            TabularRows::ExporterPubs(v) => v.len(),
            TabularRows::OrcidPerson(v) => v.len(),
            TabularRows::OrcidWorks(v) => v.len(),
            TabularRows::OrcidEmployment(v) | TabularRows::OrcidEducation(v) => v.len(),
            TabularRows::Gazetteer(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Loads `path` under the schema called `schema_name`.
pub fn load_tabular_source(path: &Path, schema_name: &str) -> Result<TabularRows, IngestError> {
    let schema: SchemaName = schema_name.parse()?;
    Ok(match schema {
        SchemaName::ExporterProjects => TabularRows::ExporterProjects(load_tabular(path, schema)?),
        SchemaName::ExporterPubs => TabularRows::ExporterPubs(load_tabular(path, schema)?),
        SchemaName::OrcidPerson => TabularRows::OrcidPerson(load_tabular(path, schema)?),
        SchemaName::OrcidWorks => TabularRows::OrcidWorks(load_tabular(path, schema)?),
        SchemaName::OrcidEmployment => TabularRows::OrcidEmployment(load_tabular(path, schema)?),
        SchemaName::OrcidEducation => TabularRows::OrcidEducation(load_tabular(path, schema)?),
        SchemaName::Gazetteer => TabularRows::Gazetteer(load_tabular(path, schema)?),
    })
}

pub fn load_tabular<T: TabularRecord>(path: &Path, schema: SchemaName) -> Result<Vec<T>, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_tabular(file, schema, &path.display().to_string())
}

pub fn read_tabular<T: TabularRecord, R: Read>(
    reader: R,
    schema: SchemaName,
    origin: &str,
) -> Result<Vec<T>, IngestError> {
    let csv_err = |source| IngestError::Csv {
        origin: origin.to_string(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    check_header(&header, schema, origin)?;
    rdr.deserialize().map(|r| r.map_err(csv_err)).collect()
}

pub fn write_tabular<T: TabularRecord, W: Write>(
    writer: W,
    schema: SchemaName,
    rows: &[T],
) -> Result<(), csv::Error> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(schema.columns())?;
    for row in rows {
        wtr.serialize(row)?;
    }
    wtr.flush()?;
    Ok(())
}

fn check_header(header: &[String], schema: SchemaName, origin: &str) -> Result<(), IngestError> {
    let expected = schema.columns();
    if header.iter().map(String::as_str).eq(expected.iter().copied()) {
        return Ok(());
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|c| !header.iter().any(|h| h == *c))
        .map(|c| c.to_string())
        .collect();
    let extra: Vec<String> = header
        .iter()
        .filter(|h| !expected.contains(&h.as_str()))
        .cloned()
        .collect();
    let order_only = missing.is_empty() && extra.is_empty();
    Err(IngestError::Schema {
        origin: origin.to_string(),
        schema: schema.as_str(),
        missing,
        extra,
        order_only,
    })
}

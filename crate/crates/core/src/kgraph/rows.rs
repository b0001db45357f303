use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::schema::{
    emit_table, EmitError, TableSchema, Value, AFFILIATIONS, AUTHOR_LIST, BIO_ENTITIES_MAIN, BIO_ENTITIES_MUTATION,
    NIH_PROJECTS, RESEARCHER_EDUCATION, RESEARCHER_EMPLOYMENT,
};
use crate::affilparse::ParsedAffiliation;
use crate::bioentity::{EntityMention, EntityType};
use crate::ingest::{Citation, InstanceKey, OrcidAffiliationRow};
use crate::linkage::{NihProjectRow, OrcidRecord};

/// A typed row of one output table. `id` is the 1-based running row
/// number; tables keyed by a foreign id ignore it.
pub trait TableRow {
    const SCHEMA: TableSchema;
    fn values(&self, id: i64) -> Vec<Value>;
}

pub fn emit_rows<'a, W: Write, R: TableRow + 'a>(
    w: W,
    rows: impl IntoIterator<Item = &'a R>,
) -> Result<usize, EmitError> {
    emit_table(
        w,
        &R::SCHEMA,
        rows.into_iter().enumerate().map(|(i, r)| r.values(i as i64 + 1)),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorListRow {
    pub pmid: u64,
    pub and_id: u64,
    pub au_order: u32,
    pub last_name: Option<String>,
    pub fore_name: Option<String>,
    pub initials: Option<String>,
    pub suffix: Option<String>,
    pub au_num: u32,
    pub pub_year: Option<i32>,
    pub begin_year: Option<i32>,
}

/// One row per author instance, ordered by (PMID, AuOrder). BeginYear is
/// the earliest PubYear under the row's AND_ID and is empty for AND_ID 0.
pub fn derive_author_list_fields(citations: &[Citation], and_ids: &BTreeMap<InstanceKey, u64>) -> Vec<AuthorListRow> {
    let and_of = |k: InstanceKey| and_ids.get(&k).copied().unwrap_or(0);
    let mut begin: HashMap<u64, i32> = HashMap::new();
    for c in citations {
        let Some(y) = c.article.pub_year else { continue };
        for a in &c.authors {
            let id = and_of(a.key());
            if id != 0 {
                begin.entry(id).and_modify(|b| *b = (*b).min(y)).or_insert(y);
            }
        }
    }
    let mut rows: Vec<AuthorListRow> = citations
        .iter()
        .flat_map(|c| {
            let au_num = c.authors.len() as u32;
            let begin = &begin;
            c.authors.iter().map(move |a| {
                let and_id = and_of(a.key());
                AuthorListRow {
                    pmid: a.pmid,
                    and_id,
                    au_order: a.au_order,
                    last_name: a.last_name.clone(),
                    fore_name: a.fore_name.clone(),
                    initials: a.initials.clone(),
                    suffix: a.suffix.clone(),
                    au_num,
                    pub_year: c.article.pub_year,
                    begin_year: if and_id == 0 { None } else { begin.get(&and_id).copied() },
                }
            })
        })
        .collect();
    rows.sort_by_key(|r| (r.pmid, r.au_order));
    rows
}

fn int(n: impl TryInto<i64>) -> Value {
    Value::Int(n.try_into().unwrap_or(i64::MAX))
}

impl TableRow for AuthorListRow {
    const SCHEMA: TableSchema = AUTHOR_LIST;

    fn values(&self, id: i64) -> Vec<Value> {
        vec![
            Value::Int(id),
            int(self.pmid),
            int(self.and_id),
            int(self.au_order),
            Value::opt_text(self.last_name.clone()),
            Value::opt_text(self.fore_name.clone()),
            Value::opt_text(self.initials.clone()),
            Value::opt_text(self.suffix.clone()),
            int(self.au_num),
            Value::opt_int(self.pub_year),
            Value::opt_int(self.begin_year),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioMainRow {
    pub pmid: u64,
    pub start: usize,
    pub end: usize,
    pub mention: String,
    pub entity_id: Option<String>,
    pub entity_type: EntityType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioMutationRow {
    pub main_id: u64,
    pub mention: String,
    pub mutation_type: String,
    pub normalized_name: String,
}

/// Main rows ordered by (PMID, Start, End, Type); mutation rows point at
/// their main row's id.
pub fn entity_rows(mentions: &[EntityMention]) -> (Vec<BioMainRow>, Vec<BioMutationRow>) {
    let mut sorted: Vec<&EntityMention> = mentions.iter().collect();
    sorted.sort_by(|a, b| {
        let ka = (a.span.pmid, a.span.start, a.span.end, a.span.entity_type);
        let kb = (b.span.pmid, b.span.start, b.span.end, b.span.entity_type);
        ka.cmp(&kb)
    });
    let mut main = Vec::with_capacity(sorted.len());
    let mut mutation = Vec::new();
    for (i, m) in sorted.into_iter().enumerate() {
        main.push(BioMainRow {
            pmid: m.span.pmid,
            start: m.span.start,
            end: m.span.end,
            mention: m.span.mention.clone(),
            entity_id: m.entity_id.clone(),
            entity_type: m.span.entity_type,
        });
        if let Some(n) = &m.mutation {
            mutation.push(BioMutationRow {
                main_id: i as u64 + 1,
                mention: n.mention.clone(),
                mutation_type: n.mutation_type.as_str().to_string(),
                normalized_name: n.normalized_name.clone(),
            });
        }
    }
    (main, mutation)
}

impl TableRow for BioMainRow {
    const SCHEMA: TableSchema = BIO_ENTITIES_MAIN;

    fn values(&self, id: i64) -> Vec<Value> {
        vec![
            Value::Int(id),
            int(self.pmid),
            int(self.start),
            int(self.end),
            Value::text(self.mention.clone()),
            Value::opt_text(self.entity_id.clone()),
            Value::text(self.entity_type.as_str()),
        ]
    }
}

impl TableRow for BioMutationRow {
    const SCHEMA: TableSchema = BIO_ENTITIES_MUTATION;

    fn values(&self, _id: i64) -> Vec<Value> {
        vec![
            int(self.main_id),
            Value::text(self.mention.clone()),
            Value::text(self.mutation_type.clone()),
            Value::text(self.normalized_name.clone()),
        ]
    }
}

/// Records with a raw string or inherited fields, ordered by
/// (PMID, AuOrder, AffiliationOrder).
pub fn affiliation_rows(records: &[ParsedAffiliation]) -> Vec<&ParsedAffiliation> {
    let mut rows: Vec<&ParsedAffiliation> = records
        .iter()
        .filter(|r| !r.raw.trim().is_empty() || r.inherited)
        .collect();
    rows.sort_by_key(|r| (r.pmid, r.au_order, r.affiliation_order));
    rows
}

impl TableRow for ParsedAffiliation {
    const SCHEMA: TableSchema = AFFILIATIONS;

    fn values(&self, id: i64) -> Vec<Value> {
        let f = &self.fields;
        vec![
            Value::Int(id),
            int(self.pmid),
            int(self.au_order),
            int(self.and_id.unwrap_or(0)),
            int(self.affiliation_order),
            Value::text(self.raw.clone()),
            Value::opt_text(f.department.clone()),
            Value::opt_text(f.institution.clone()),
            Value::opt_text(f.email.clone()),
            Value::opt_text(f.zip_code.clone()),
            Value::opt_text(f.location.clone()),
            Value::opt_text(f.country.clone()),
            Value::opt_text(f.city.clone()),
            Value::opt_text(f.state.clone()),
            Value::text(f.affiliation_type.as_str()),
            Value::opt_real(f.latitude),
            Value::opt_real(f.longitude),
            Value::opt_int(f.fips),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmploymentRow {
    pub and_id: u64,
    pub entry: OrcidAffiliationRow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EducationRow {
    pub and_id: u64,
    pub entry: OrcidAffiliationRow,
}

/// Employment and education entries of every linked ORCID record, in
/// (AND_ID, ORCID) order and then source order.
pub fn researcher_rows(linked: &[(u64, &OrcidRecord)]) -> (Vec<EmploymentRow>, Vec<EducationRow>) {
    let mut linked = linked.to_vec();
    linked.sort_by(|a, b| (a.0, &a.1.orcid_id).cmp(&(b.0, &b.1.orcid_id)));
    let mut emp = Vec::new();
    let mut edu = Vec::new();
    for (and_id, r) in linked {
        emp.extend(r.employments.iter().map(|e| EmploymentRow { and_id, entry: e.clone() }));
        edu.extend(r.educations.iter().map(|e| EducationRow { and_id, entry: e.clone() }));
    }
    (emp, edu)
}

fn year(y: Option<i32>) -> Value {
    Value::opt_text(y.map(|y| y.to_string()))
}

impl TableRow for EmploymentRow {
    const SCHEMA: TableSchema = RESEARCHER_EMPLOYMENT;

    fn values(&self, id: i64) -> Vec<Value> {
        let e = &self.entry;
        vec![
            Value::Int(id),
            int(self.and_id),
            Value::text(e.orcid.clone()),
            Value::opt_text(e.department.clone()),
            year(e.begin_year),
            Value::text(e.organization.clone()),
            Value::opt_text(e.city.clone()),
            Value::opt_text(e.region.clone()),
            Value::opt_text(e.country.clone()),
            Value::opt_text(e.identifier.clone()),
            Value::opt_text(e.id_source.clone()),
            year(e.end_year),
        ]
    }
}

impl TableRow for EducationRow {
    const SCHEMA: TableSchema = RESEARCHER_EDUCATION;

    fn values(&self, id: i64) -> Vec<Value> {
        let e = &self.entry;
        vec![
            Value::Int(id),
            int(self.and_id),
            Value::text(e.orcid.clone()),
            year(e.begin_year),
            Value::text(e.organization.clone()),
            Value::opt_text(e.city.clone()),
            Value::opt_text(e.region.clone()),
            Value::opt_text(e.country.clone()),
            Value::opt_text(e.identifier.clone()),
            Value::opt_text(e.id_source.clone()),
            year(e.end_year),
            Value::opt_text(e.role.clone()),
        ]
    }
}

impl TableRow for NihProjectRow {
    const SCHEMA: TableSchema = NIH_PROJECTS;

    fn values(&self, id: i64) -> Vec<Value> {
        vec![
            Value::Int(id),
            int(self.and_id),
            Value::text(self.pi_id.clone()),
            int(self.pmid),
            Value::text(self.project_number.clone()),
            Value::opt_text(self.sub_project_number.clone()),
            Value::text(self.pi_name.clone()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{ArticleRecord, AuthorInstance};

    fn citation(pmid: u64, year: i32, n: u32) -> Citation {
        Citation {
            article: ArticleRecord {
                pmid,
                pub_year: Some(year),
                journal: "J".into(),
                title: "T".into(),
                doi: None,
                abstract_text: None,
            },
            authors: (1..=n)
                .map(|i| AuthorInstance {
                    pmid,
                    au_order: i,
                    last_name: Some(format!("L{i}")),
                    fore_name: None,
                    initials: None,
                    suffix: None,
                    affiliation_strings: vec![],
                })
                .collect(),
        }
    }

    #[test]
    fn begin_year_and_au_num() {
        let cits = vec![citation(2, 2010, 3), citation(1, 2007, 1)];
        let ids: BTreeMap<InstanceKey, u64> = [(InstanceKey::new(1, 1), 8), (InstanceKey::new(2, 2), 8)].into();
        let rows = derive_author_list_fields(&cits, &ids);
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[0].pmid, rows[0].begin_year), (1, Some(2007)));
        let r = rows.iter().find(|r| r.pmid == 2 && r.au_order == 2).unwrap();
        assert_eq!((r.begin_year, r.au_num), (Some(2007), 3));
        let z = rows.iter().find(|r| r.pmid == 2 && r.au_order == 1).unwrap();
        assert_eq!((z.and_id, z.begin_year), (0, None));
        assert!(rows.iter().filter(|r| r.and_id != 0).all(|r| r.begin_year <= r.pub_year));
    }

    #[test]
    fn author_list_emits_zero_and_empty_begin_year() {
        let cits = vec![citation(1, 2001, 1)];
        let rows = derive_author_list_fields(&cits, &BTreeMap::new());
        let mut buf = Vec::new();
        emit_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1), Some("1,1,0,1,L1,,,,1,2001,"));
    }
}

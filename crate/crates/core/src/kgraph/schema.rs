use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Integer,
    Real,
    Text,
}

impl ColumnType {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnType::Integer => "integer",
            ColumnType::Real => "real",
            ColumnType::Text => "text",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableSchema {
    pub name: &'static str,
    pub columns: &'static [(&'static str, ColumnType)],
}

use ColumnType::{Integer as I, Real as R, Text as T};

pub const AUTHOR_LIST: TableSchema = TableSchema {
    name: "Author_List",
    columns: &[
        ("id", I),
        ("PMID", I),
        ("AND_ID", I),
        ("AuOrder", I),
        ("LastName", T),
        ("ForeName", T),
        ("Initials", T),
        ("Suffix", T),
        ("AuNum", I),
        ("PubYear", I),
        ("BeginYear", I),
    ],
};

pub const BIO_ENTITIES_MAIN: TableSchema = TableSchema {
    name: "Bio_entities_Main",
    columns: &[
        ("id", I),
        ("PMID", I),
        ("Start", I),
        ("End", I),
        ("Mention", T),
        ("EntityID", T),
        ("Type", T),
    ],
};

pub const BIO_ENTITIES_MUTATION: TableSchema = TableSchema {
    name: "Bio_entities_Mutation",
    columns: &[("Main_id", I), ("Mention", T), ("MutationType", T), ("NormalizedName", T)],
};

pub const AFFILIATIONS: TableSchema = TableSchema {
    name: "Affiliations",
    columns: &[
        ("id", I),
        ("PMID", I),
        ("AuOrder", I),
        ("AND_ID", I),
        ("AffiliationOrder", I),
        ("Affiliation", T),
        ("Department", T),
        ("Institution", T),
        ("Email", T),
        ("ZipCode", T),
        ("Location", T),
        ("Country", T),
        ("City", T),
        ("State", T),
        ("AffiliationType", T),
        ("Latitude", R),
        ("Longitude", R),
        ("Fips", I),
    ],
};

pub const RESEARCHER_EMPLOYMENT: TableSchema = TableSchema {
    name: "Researcher_Employment",
    columns: &[
        ("id", I),
        ("AND_ID", I),
        ("ORCID", T),
        ("Department", T),
        ("BeginYear", T),
        ("Organization", T),
        ("City", T),
        ("Region", T),
        ("Country", T),
        ("Identifier", T),
        ("IdSource", T),
        ("EndYear", T),
    ],
};

pub const RESEARCHER_EDUCATION: TableSchema = TableSchema {
    name: "Researcher_Education",
    columns: &[
        ("id", I),
        ("AND_ID", I),
        ("ORCID", T),
        ("BeginYear", T),
        ("Organization", T),
        ("City", T),
        ("Region", T),
        ("Country", T),
        ("Identifier", T),
        ("IdSource", T),
        ("EndYear", T),
        ("Role", T),
    ],
};

pub const NIH_PROJECTS: TableSchema = TableSchema {
    name: "NIH_Projects",
    columns: &[
        ("id", I),
        ("AND_ID", I),
        ("PI_ID", T),
        ("PMID", I),
        ("ProjectNumber", T),
        ("subProjectNumber", T),
        ("PI_Name", T),
    ],
};

pub const ALL_TABLES: [TableSchema; 7] = [
    AUTHOR_LIST,
    BIO_ENTITIES_MAIN,
    BIO_ENTITIES_MUTATION,
    AFFILIATIONS,
    RESEARCHER_EMPLOYMENT,
    RESEARCHER_EDUCATION,
    NIH_PROJECTS,
];

impl TableSchema {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn header(&self) -> String {
        let names: Vec<&str> = self.columns.iter().map(|(n, _)| *n).collect();
        names.join(",")
    }

    pub fn by_name(name: &str) -> Option<TableSchema> {
        ALL_TABLES.into_iter().find(|t| t.name == name)
    }
}

/// One cell. An empty string is not representable as text: it is written
/// and read back as [`Value::Null`].
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
    Null,
}

impl Value {
    pub fn text(s: impl Into<String>) -> Value {
        let s = s.into();
        if s.is_empty() {
            Value::Null
        } else {
            Value::Text(s)
        }
    }

    pub fn opt_text<S: Into<String>>(s: Option<S>) -> Value {
        s.map_or(Value::Null, Value::text)
    }

    pub fn opt_int<N: Into<i64>>(n: Option<N>) -> Value {
        n.map_or(Value::Null, |n| Value::Int(n.into()))
    }

    pub fn opt_real(x: Option<f64>) -> Value {
        x.map_or(Value::Null, Value::Real)
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Text(_) => "text",
            Value::Null => "null",
        }
    }
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("{table} row {row}: expected {expected} columns, got {found}")]
    Arity {
        table: &'static str,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{table} row {row}, column {column}: expected {expected}, got {found}")]
    Type {
        table: &'static str,
        row: usize,
        column: &'static str,
        expected: &'static str,
        found: String,
    },
    #[error("{table} row {row}: id {id} does not follow {previous}")]
    Order {
        table: &'static str,
        row: usize,
        id: i64,
        previous: i64,
    },
    #[error("{table}: header mismatch: {found:?}")]
    Header { table: &'static str, found: String },
    #[error("{table}: {source}")]
    Csv {
        table: &'static str,
        #[source]
        source: csv::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn push_field(out: &mut String, s: &str) {
    if s.contains([',', '"', '\n', '\r']) {
        out.push('"');
        for c in s.chars() {
            if c == '"' {
                out.push('"');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(s);
    }
}

/// Writes `rows` as RFC-4180 CSV with LF line endings.
///
/// The first column must hold strictly ascending integers. Returns the
/// number of data rows written.
pub fn emit_table<W: Write, I>(mut w: W, schema: &TableSchema, rows: I) -> Result<usize, EmitError>
where
    I: IntoIterator<Item = Vec<Value>>,
{
    let table = schema.name;
    writeln!(w, "{}", schema.header())?;
    let mut line = String::new();
    let mut previous: Option<i64> = None;
    let mut n = 0;
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        if row.len() != schema.columns.len() {
            return Err(EmitError::Arity {
                table,
                row: row_no,
                expected: schema.columns.len(),
                found: row.len(),
            });
        }
        line.clear();
        for (j, (value, (column, ty))) in row.iter().zip(schema.columns).enumerate() {
            if j > 0 {
                line.push(',');
            }
            let mismatch = || EmitError::Type {
                table,
                row: row_no,
                column,
                expected: ty.as_str(),
                found: value.kind().to_string(),
            };
            match (value, ty) {
                (Value::Null, _) => {}
                (Value::Int(v), ColumnType::Integer) => line.push_str(&v.to_string()),
                (Value::Real(v), ColumnType::Real) => {
                    if !v.is_finite() {
                        return Err(EmitError::Type {
                            table,
                            row: row_no,
                            column,
                            expected: "finite real",
                            found: v.to_string(),
                        });
                    }
                    line.push_str(&v.to_string());
                }
                (Value::Text(s), ColumnType::Text) => push_field(&mut line, s),
                _ => return Err(mismatch()),
            }
        }
        match row[0] {
            Value::Int(id) => {
                if let Some(p) = previous.filter(|p| id <= *p) {
                    return Err(EmitError::Order { table, row: row_no, id, previous: p });
                }
                previous = Some(id);
            }
            _ => {
                return Err(EmitError::Type {
                    table,
                    row: row_no,
                    column: schema.columns[0].0,
                    expected: "integer",
                    found: row[0].kind().to_string(),
                })
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
        n += 1;
    }
    w.flush()?;
    Ok(n)
}

/// Reads a table back through the `csv` crate, typing cells by schema.
pub fn read_table<R: Read>(reader: R, schema: &TableSchema) -> Result<Vec<Vec<Value>>, EmitError> {
    let table = schema.name;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|source| EmitError::Csv { table, source })?;
    let got: Vec<&str> = header.iter().collect();
    if got.join(",") != schema.header() {
        return Err(EmitError::Header { table, found: got.join(",") });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|source| EmitError::Csv { table, source })?;
        let mut row = Vec::with_capacity(rec.len());
        for (cell, (column, ty)) in rec.iter().zip(schema.columns) {
            let bad = || EmitError::Type {
                table,
                row: i + 1,
                column,
                expected: ty.as_str(),
                found: cell.to_string(),
            };
            row.push(match (cell.is_empty(), ty) {
                (true, _) => Value::Null,
                (false, ColumnType::Integer) => Value::Int(cell.parse().map_err(|_| bad())?),
                (false, ColumnType::Real) => Value::Real(cell.parse().map_err(|_| bad())?),
                (false, ColumnType::Text) => Value::Text(cell.to_string()),
            });
        }
        out.push(row);
    }
    Ok(out)
}

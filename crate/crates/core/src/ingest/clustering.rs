//! Author-clustering TSV: `pmid<TAB>au_order<TAB>cluster_id`, no header.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{IngestError, InstanceKey};

/// One upstream disambiguation result: instance key to source-local cluster.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceClustering {
    pub source_name: String,
    pub assignments: BTreeMap<InstanceKey, u64>,
    pub coverage_end_year: Option<i32>,
}

impl SourceClustering {
    pub fn new(source_name: impl Into<String>) -> Self {
        Self {
            source_name: source_name.into(),
            ..Self::default()
        }
    }

    /// Builds a clustering from pairs, rejecting duplicate keys.
    pub fn from_pairs(
        source_name: impl Into<String>,
        pairs: impl IntoIterator<Item = (InstanceKey, u64)>,
    ) -> Result<Self, IngestError> {
        let mut out = Self::new(source_name);
        for (line, (key, cluster)) in pairs.into_iter().enumerate() {
            if out.assignments.insert(key, cluster).is_some() {
                return Err(IngestError::DuplicateKey {
                    origin: out.source_name.clone(),
                    line: line + 1,
                    pmid: key.pmid,
                    au_order: key.au_order,
                });
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn get(&self, key: &InstanceKey) -> Option<u64> {
        self.assignments.get(key).copied()
    }
}

pub fn load_clustering(path: &Path, source_name: &str) -> Result<SourceClustering, IngestError> {
    let file = File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_clustering(BufReader::new(file), source_name, &path.display().to_string())
}

pub fn read_clustering<R: BufRead>(
    reader: R,
    source_name: &str,
    origin: &str,
) -> Result<SourceClustering, IngestError> {
    let mut out = SourceClustering::new(source_name);
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io {
            path: origin.to_string(),
            source,
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| IngestError::Parse {
            origin: origin.to_string(),
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let int = |name: &str, s: &str| -> Result<u64, IngestError> {
            match s.trim().parse::<u64>() {
                Ok(v) if v > 0 => Ok(v),
                Ok(_) => Err(parse_err(format!("{name} must be positive"))),
                Err(_) => Err(parse_err(format!("{name} is not an integer: {s:?}"))),
            }
        };
        let pmid = int("pmid", fields[0])?;
        let au_order = u32::try_from(int("au_order", fields[1])?)
            .map_err(|_| parse_err("au_order out of range".into()))?;
        let cluster = int("cluster_id", fields[2])?;
        let key = InstanceKey::new(pmid, au_order);
        if out.assignments.insert(key, cluster).is_some() {
            return Err(IngestError::DuplicateKey {
                origin: origin.to_string(),
                line: line_no,
                pmid,
                au_order,
            });
        }
    }
    Ok(out)
}

pub fn write_clustering<W: Write>(mut w: W, clustering: &SourceClustering) -> std::io::Result<()> {
    for (key, cluster) in &clustering.assignments {
        writeln!(w, "{}\t{}\t{}", key.pmid, key.au_order, cluster)?;
    }
    Ok(())
}

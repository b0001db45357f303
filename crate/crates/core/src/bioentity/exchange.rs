//! JSON-lines exchange format for external tagger output.
//!
//! One line per (abstract, entity type):
//!
//! ```text
//! {"pmid":101,"entity_type":"gene","tokens":[{"text":"[CLS]","start":null,"end":null,"probs":[0,0,0,0,1,0,0]}, ...]}
//! ```
//!
//! `probs` follows the tag order B, I, O, X, [CLS], [SEP], PAD; offsets are
//! code points into the abstract, end exclusive.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{BioError, EntityType, TagDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggerRecord {
    pub pmid: u64,
    pub entity_type: EntityType,
    pub tokens: Vec<TagDistribution>,
}

pub fn read_tagger_output<R: BufRead>(reader: R) -> impl Iterator<Item = Result<TaggerRecord, BioError>> {
    reader
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|(idx, line)| {
            let line = line.map_err(|e| BioError::Exchange {
                line: idx + 1,
                message: e.to_string(),
            })?;
            serde_json::from_str(&line).map_err(|e| BioError::Exchange {
                line: idx + 1,
                message: e.to_string(),
            })
        })
}

pub fn write_tagger_record<W: Write>(mut w: W, record: &TaggerRecord) -> std::io::Result<()> {
    serde_json::to_writer(&mut w, record)?;
    w.write_all(b"\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bioentity::Tag;

    #[test]
    fn round_trip_and_line_errors() {
        let rec = TaggerRecord {
            pmid: 5,
            entity_type: EntityType::Disease,
            tokens: vec![TagDistribution {
                text: "flu".into(),
                start: Some(0),
                end: Some(3),
                probs: Tag::B.one_hot(),
            }],
        };
        let mut buf = Vec::new();
        write_tagger_record(&mut buf, &rec).unwrap();
        buf.extend_from_slice(b"\n{not json}\n");
        let got: Vec<_> = read_tagger_output(buf.as_slice()).collect();
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].as_ref().unwrap(), &rec);
        assert!(matches!(got[1], Err(BioError::Exchange { line: 3, .. })));
    }
}

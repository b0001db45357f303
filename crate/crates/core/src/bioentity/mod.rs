//! Bio-entity spans: decoding tagger output, cross-type overlap resolution,
//! dictionary normalization, mutation normalization, and a dictionary
//! longest-match tagger used when no model output is supplied.

mod baseline;
mod dictionary;
mod exchange;
mod mutation;
mod overlap;
mod tags;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use baseline::{baseline_candidates, baseline_tag};
pub use dictionary::{
    load_dictionary, normalize_mention, read_dictionary, Dictionaries, Dictionary, DictionaryStats,
};
pub use exchange::{read_tagger_output, write_tagger_record, TaggerRecord};
pub use mutation::{normalize_mutation, MutationNorm, MutationType};
pub use overlap::{overlap_rate, resolve_type_overlaps, OverlapResolution};
pub use tags::{decode_tag_sequence, encode_tags, DecodedSpans, Tag, TagDistribution, TokenSlot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Gene,
    Disease,
    Drug,
    Species,
    Mutation,
}

impl EntityType {
    /// Tie-break priority order, highest first.
    pub const ALL: [EntityType; 5] = [
        EntityType::Gene,
        EntityType::Disease,
        EntityType::Drug,
        EntityType::Species,
        EntityType::Mutation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Gene => "gene",
            EntityType::Disease => "disease",
            EntityType::Drug => "drug",
            EntityType::Species => "species",
            EntityType::Mutation => "mutation",
        }
    }

    /// Smaller is stronger when scores tie.
    pub fn priority(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EntityType {
    type Err = BioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gene" | "gene/protein" | "protein" => Ok(EntityType::Gene),
            "disease" => Ok(EntityType::Disease),
            "drug" | "chemical" | "drug/chemical" => Ok(EntityType::Drug),
            "species" => Ok(EntityType::Species),
            "mutation" => Ok(EntityType::Mutation),
            _ => Err(BioError::UnknownType(s.to_string())),
        }
    }
}

/// A typed mention in an abstract. Offsets are code points, end exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub pmid: u64,
    pub start: usize,
    pub end: usize,
    pub mention: String,
    pub entity_type: EntityType,
    pub score: f64,
}

impl EntitySpan {
    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.pmid == other.pmid && self.start < other.end && other.start < self.end
    }
}

/// Dictionary identifier namespaced by entity type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntityKey {
    pub entity_type: EntityType,
    pub id: String,
}

impl fmt::Display for EntityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.entity_type, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityMention {
    pub span: EntitySpan,
    pub entity_id: Option<String>,
    pub mutation: Option<MutationNorm>,
}

impl EntityMention {
    pub fn key(&self) -> Option<EntityKey> {
        self.entity_id.as_ref().map(|id| EntityKey {
            entity_type: self.span.entity_type,
            id: id.clone(),
        })
    }
}

#[derive(Debug, Error)]
pub enum BioError {
    #[error("token {index} ({text:?}) is not aligned to the abstract: {reason}")]
    Alignment {
        index: usize,
        text: String,
        reason: String,
    },
    #[error("token {index}: invalid tag distribution: {reason}")]
    Distribution { index: usize, reason: String },
    #[error("{origin}:{line}: {message}")]
    DictionaryLine {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("unknown entity type `{0}`")]
    UnknownType(String),
    #[error("tagger output line {line}: {message}")]
    Exchange { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

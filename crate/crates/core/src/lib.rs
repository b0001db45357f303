//! PubMed knowledge-graph construction: citation ingest, bio-entity
//! decoding and normalization, author-ID merging, registry and funding
//! linkage, affiliation parsing, evaluation, and table/graph emission.

pub mod affilparse;
pub mod andmerge;
pub mod bioentity;
pub mod evalmetrics;
pub mod ingest;
pub mod kgraph;
pub mod linkage;
pub mod pipeline;
pub mod synth;
pub mod text;

use std::path::PathBuf;

use thiserror::Error;

/// Crate-level error; every message is prefixed by the module it came from.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ingest: {0}")]
    Ingest(#[from] ingest::IngestError),
    #[error("bioentity: {0}")]
    Bio(#[from] bioentity::BioError),
    #[error("andmerge: {0}")]
    Merge(#[from] andmerge::MergeError),
    #[error("affilparse: {0}")]
    Affil(#[from] affilparse::AffilError),
    #[error("evalmetrics: {0}")]
    Eval(#[from] evalmetrics::EvalError),
    #[error("kgraph: {0}")]
    Emit(#[from] kgraph::EmitError),
    #[error("kgraph: {0}")]
    Graph(#[from] kgraph::GraphError),
    #[error("config: {0}")]
    Config(String),
    #[error("missing input `{what}`: {}", path.display())]
    MissingInput { what: String, path: PathBuf },
    #[error("pipeline: {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pipeline: {}:{line}: {message}", path.display())]
    Intermediate {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Output tables and the author–entity network.

mod graph;
mod rows;
mod schema;

pub use graph::{
    build_bipartite, project_authors, project_entities, BipartiteGraph, GraphError, ProjectedGraph, Vertex,
};
pub use rows::{
    affiliation_rows, derive_author_list_fields, emit_rows, entity_rows, researcher_rows, AuthorListRow,
    BioMainRow, BioMutationRow, EducationRow, EmploymentRow, TableRow,
};
pub use schema::{
    emit_table, read_table, ColumnType, EmitError, TableSchema, Value, AFFILIATIONS, ALL_TABLES, AUTHOR_LIST,
    BIO_ENTITIES_MAIN, BIO_ENTITIES_MUTATION, NIH_PROJECTS, RESEARCHER_EDUCATION, RESEARCHER_EMPLOYMENT,
};

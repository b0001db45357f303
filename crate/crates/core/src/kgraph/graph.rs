use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use thiserror::Error;

use super::rows::AuthorListRow;
use crate::bioentity::EntityMention;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Author(u64),
    /// `type:id` entity key.
    Entity(String),
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Vertex::Author(id) => write!(f, "{id}"),
            Vertex::Entity(k) => f.write_str(k),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {0} -- {1} joins two vertices on the same side")]
    SameSide(Vertex, Vertex),
    #[error("edge {0} -- {1} has non-positive weight")]
    ZeroWeight(Vertex, Vertex),
}

/// Author–entity graph; edge weight counts papers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BipartiteGraph {
    authors: BTreeSet<u64>,
    entities: BTreeSet<String>,
    edges: BTreeMap<(u64, String), u64>,
}

impl BipartiteGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: Vertex) {
        match v {
            Vertex::Author(a) => {
                self.authors.insert(a);
            }
            Vertex::Entity(e) => {
                self.entities.insert(e);
            }
        }
    }

    /// Adds `weight` to the edge between `a` and `b`, in either order.
    pub fn add_edge(&mut self, a: Vertex, b: Vertex, weight: u64) -> Result<(), GraphError> {
        let (author, entity) = match (&a, &b) {
            (Vertex::Author(x), Vertex::Entity(e)) | (Vertex::Entity(e), Vertex::Author(x)) => (*x, e.clone()),
            _ => return Err(GraphError::SameSide(a, b)),
        };
        if weight == 0 {
            return Err(GraphError::ZeroWeight(a, b));
        }
        self.authors.insert(author);
        self.entities.insert(entity.clone());
        *self.edges.entry((author, entity)).or_default() += weight;
        Ok(())
    }

    pub fn authors(&self) -> &BTreeSet<u64> {
        &self.authors
    }

    pub fn entities(&self) -> &BTreeSet<String> {
        &self.entities
    }

    pub fn edges(&self) -> impl Iterator<Item = (u64, &str, u64)> + '_ {
        self.edges.iter().map(|((a, e), w)| (*a, e.as_str(), *w))
    }

    pub fn weight(&self, author: u64, entity: &str) -> Option<u64> {
        self.edges.get(&(author, entity.to_string())).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "source,target,weight")?;
        for (a, e, wt) in self.edges() {
            writeln!(w, "{a},{},{wt}", csv_field(e))?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Links every disambiguated author to every normalized entity mentioned
/// in the same paper. AND_ID 0 and unnormalized mentions are skipped;
/// normalized entities without a co-occurring author stay isolated.
pub fn build_bipartite(author_rows: &[AuthorListRow], mentions: &[EntityMention]) -> BipartiteGraph {
    let mut authors_by_pmid: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for r in author_rows.iter().filter(|r| r.and_id != 0) {
        authors_by_pmid.entry(r.pmid).or_default().insert(r.and_id);
    }
    let mut entities_by_pmid: BTreeMap<u64, BTreeSet<String>> = BTreeMap::new();
    for m in mentions {
        if let Some(k) = m.key() {
            entities_by_pmid.entry(m.span.pmid).or_default().insert(k.to_string());
        }
    }
    let pairs: Vec<(u64, String)> = entities_by_pmid
        .par_iter()
        .filter_map(|(pmid, ents)| authors_by_pmid.get(pmid).map(|auths| (auths, ents)))
        .flat_map_iter(|(auths, ents)| {
            auths
                .iter()
                .flat_map(move |a| ents.iter().map(move |e| (*a, e.clone())))
        })
        .collect();

    let mut g = BipartiteGraph::new();
    for a in authors_by_pmid.values().flatten() {
        g.add_vertex(Vertex::Author(*a));
    }
    for e in entities_by_pmid.into_values().flatten() {
        g.add_vertex(Vertex::Entity(e));
    }
    for (a, e) in pairs {
        *g.edges.entry((a, e)).or_default() += 1;
    }
    g
}

/// One-mode projection; weight = number of common neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjectedGraph<V: Ord> {
    pub vertices: BTreeSet<V>,
    /// Keys have `u < v`.
    pub edges: BTreeMap<(V, V), u64>,
}

impl<V: Ord + Clone + fmt::Display> ProjectedGraph<V> {
    pub fn weight(&self, u: &V, v: &V) -> Option<u64> {
        let key = if u < v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
        self.edges.get(&key).copied()
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "source,target,weight")?;
        for ((u, v), wt) in &self.edges {
            writeln!(w, "{},{},{wt}", csv_field(&u.to_string()), csv_field(&v.to_string()))?;
        }
        Ok(())
    }
}

fn common_neighbors<V: Ord + Clone, O: Ord>(
    vertices: BTreeSet<V>,
    incidences: impl Iterator<Item = (O, V)>,
) -> ProjectedGraph<V> {
    let mut by_other: BTreeMap<O, Vec<V>> = BTreeMap::new();
    for (o, v) in incidences {
        by_other.entry(o).or_default().push(v);
    }
    let mut edges: BTreeMap<(V, V), u64> = BTreeMap::new();
    for mut group in by_other.into_values() {
        group.sort();
        group.dedup();
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                *edges.entry((group[i].clone(), group[j].clone())).or_default() += 1;
            }
        }
    }
    ProjectedGraph { vertices, edges }
}

pub fn project_authors(g: &BipartiteGraph) -> ProjectedGraph<u64> {
    common_neighbors(g.authors.clone(), g.edges.keys().map(|(a, e)| (e.as_str(), *a)))
}

pub fn project_entities(g: &BipartiteGraph) -> ProjectedGraph<String> {
    common_neighbors(g.entities.clone(), g.edges.keys().map(|(a, e)| (*a, e.clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bioentity::{EntitySpan, EntityType};

    fn author_row(pmid: u64, and_id: u64) -> AuthorListRow {
        AuthorListRow {
            pmid,
            and_id,
            au_order: 1,
            last_name: None,
            fore_name: None,
            initials: None,
            suffix: None,
            au_num: 1,
            pub_year: None,
            begin_year: None,
        }
    }

    fn mention(pmid: u64, start: usize, id: Option<&str>) -> EntityMention {
        EntityMention {
            span: EntitySpan {
                pmid,
                start,
                end: start + 1,
                mention: "x".into(),
                entity_type: EntityType::Disease,
                score: 1.0,
            },
            entity_id: id.map(Into::into),
            mutation: None,
        }
    }

    #[test]
    fn repeated_mention_counts_once_per_paper() {
        let g = build_bipartite(&[author_row(1, 5)], &[mention(1, 0, Some("D1")), mention(1, 10, Some("D1"))]);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(5, "disease:D1"), Some(1));
    }

    #[test]
    fn isolated_entity_and_zero_author() {
        let g = build_bipartite(&[author_row(1, 0)], &[mention(1, 0, Some("D1")), mention(1, 3, None)]);
        assert_eq!(g.edge_count(), 0);
        assert!(g.entities().contains("disease:D1"));
        assert!(g.authors().is_empty());
    }

    #[test]
    fn projection_counts_common_neighbors() {
        let mut g = BipartiteGraph::new();
        for a in [1, 2] {
            for e in ["e1", "e2"] {
                g.add_edge(Vertex::Author(a), Vertex::Entity(e.into()), 3).unwrap();
            }
        }
        let p = project_authors(&g);
        assert_eq!(p.weight(&1, &2), Some(2));
        assert_eq!(p.weight(&2, &1), Some(2));
        let q = project_entities(&g);
        assert_eq!(q.weight(&"e1".to_string(), &"e2".to_string()), Some(2));
    }

    #[test]
    fn single_author_projection_is_empty() {
        let mut g = BipartiteGraph::new();
        g.add_edge(Vertex::Entity("e".into()), Vertex::Author(1), 1).unwrap();
        assert!(project_authors(&g).edges.is_empty());
    }

    #[test]
    fn same_side_and_zero_weight_rejected() {
        let mut g = BipartiteGraph::new();
        assert!(matches!(g.add_edge(Vertex::Author(1), Vertex::Author(2), 1), Err(GraphError::SameSide(..))));
        assert!(matches!(
            g.add_edge(Vertex::Entity("a".into()), Vertex::Entity("b".into()), 1),
            Err(GraphError::SameSide(..))
        ));
        assert!(matches!(g.add_edge(Vertex::Author(1), Vertex::Entity("b".into()), 0), Err(GraphError::ZeroWeight(..))));
    }
}

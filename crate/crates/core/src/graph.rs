//! Per-ontology hierarchy graph with filtered, cycle-safe traversal.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relation name of `rdfs:subClassOf` edges.
pub const SUBCLASS_OF: &str = "subclass_of";
/// Default traversal result cap.
pub const DEFAULT_CAP: usize = 10_000;

const MAGIC: &[u8; 8] = b"OLSGRAPH";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphNode {
    pub iri: String,
    pub ontology_id: String,
    pub label: Option<String>,
    pub is_obsolete: bool,
    pub defining_ontology: Option<String>,
    /// Whether the node has children under the filter used for the query.
    pub has_children: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: String,
    pub relation: String,
    pub target: String,
}

/// Node description handed to [`OntologyGraph::build`].
#[derive(Debug, Clone, Default)]
pub struct NodeInput {
    pub iri: String,
    pub label: Option<String>,
    pub is_obsolete: bool,
    pub defining_ontology: Option<String>,
    pub is_class: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node {0}")]
    NotFound(String),
    #[error("unknown relation '{0}'")]
    UnknownRelation(String),
    #[error("corrupt graph segment: {0}")]
    Corrupt(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct NodeData {
    iri: String,
    label: Option<String>,
    is_obsolete: bool,
    defining_ontology: Option<String>,
    is_class: bool,
    /// False for edge targets with no record of their own.
    has_record: bool,
}

/// Relations a traversal follows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationFilter(Vec<bool>);

impl RelationFilter {
    fn allows(&self, relation: u16) -> bool {
        self.0.get(relation as usize).copied().unwrap_or(false)
    }
}

/// A traversal result capped at a maximum size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Traversal {
    pub nodes: Vec<GraphNode>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyGraph {
    ontology_id: String,
    relations: Vec<String>,
    nodes: Vec<NodeData>,
    lookup: HashMap<String, u32>,
    out: Vec<Vec<(u16, u32)>>,
    inc: Vec<Vec<(u16, u32)>>,
}

impl OntologyGraph {
    /// Builds a graph from node descriptions and edges. `relations` lists the
    /// configured hierarchical relations besides [`SUBCLASS_OF`]; edges with
    /// other relations are dropped, duplicates collapse, and edge endpoints
    /// without a node description get a bare node.
    pub fn build(ontology_id: &str, relations: &[String], nodes: Vec<NodeInput>, edges: &[GraphEdge]) -> Self {
        let mut rels = vec![SUBCLASS_OF.to_string()];
        for r in relations {
            if !rels.contains(r) {
                rels.push(r.clone());
            }
        }
        let rel_index: HashMap<&str, u16> = rels.iter().enumerate().map(|(i, r)| (r.as_str(), i as u16)).collect();
        let mut g = OntologyGraph {
            ontology_id: ontology_id.to_string(),
            relations: rels.clone(),
            nodes: Vec::new(),
            lookup: HashMap::new(),
            out: Vec::new(),
            inc: Vec::new(),
        };
        for n in nodes {
            if g.lookup.contains_key(&n.iri) {
                continue;
            }
            g.push(NodeData {
                iri: n.iri,
                label: n.label,
                is_obsolete: n.is_obsolete,
                defining_ontology: n.defining_ontology,
                is_class: n.is_class,
                has_record: true,
            });
        }
        let mut seen = HashSet::new();
        for e in edges {
            let Some(&rel) = rel_index.get(e.relation.as_str()) else { continue };
            let s = g.node_or_stub(&e.source);
            let t = g.node_or_stub(&e.target);
            if seen.insert((s, rel, t)) {
                g.out[s as usize].push((rel, t));
                g.inc[t as usize].push((rel, s));
            }
        }
        g
    }

    fn push(&mut self, node: NodeData) -> u32 {
        let id = self.nodes.len() as u32;
        self.lookup.insert(node.iri.clone(), id);
        self.nodes.push(node);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        id
    }

    fn node_or_stub(&mut self, iri: &str) -> u32 {
        if let Some(&id) = self.lookup.get(iri) {
            return id;
        }
        self.push(NodeData {
            iri: iri.to_string(),
            label: None,
            is_obsolete: false,
            defining_ontology: None,
            is_class: false,
            has_record: false,
        })
    }

    pub fn ontology_id(&self) -> &str {
        &self.ontology_id
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn contains(&self, iri: &str) -> bool {
        self.lookup.contains_key(iri)
    }

    pub fn edges(&self) -> Vec<GraphEdge> {
        let mut out = Vec::new();
        for (s, targets) in self.out.iter().enumerate() {
            for &(rel, t) in targets {
                out.push(GraphEdge {
                    source: self.nodes[s].iri.clone(),
                    relation: self.relations[rel as usize].clone(),
                    target: self.nodes[t as usize].iri.clone(),
                });
            }
        }
        out
    }

    /// Only subclass edges.
    pub fn subclass_filter(&self) -> RelationFilter {
        let mut f = vec![false; self.relations.len()];
        f[0] = true;
        RelationFilter(f)
    }

    pub fn all_filter(&self) -> RelationFilter {
        RelationFilter(vec![true; self.relations.len()])
    }

    /// Filter from relation names; `None` means subclass only and `"all"`
    /// selects every relation.
    pub fn filter<S: AsRef<str>>(&self, names: Option<&[S]>) -> Result<RelationFilter, GraphError> {
        let Some(names) = names else { return Ok(self.subclass_filter()) };
        if names.iter().any(|n| n.as_ref() == "all") {
            return Ok(self.all_filter());
        }
        let mut f = vec![false; self.relations.len()];
        for n in names {
            let i = self
                .relations
                .iter()
                .position(|r| r == n.as_ref())
                .ok_or_else(|| GraphError::UnknownRelation(n.as_ref().to_string()))?;
            f[i] = true;
        }
        Ok(RelationFilter(f))
    }

    fn id(&self, iri: &str) -> Result<u32, GraphError> {
        self.lookup.get(iri).copied().ok_or_else(|| GraphError::NotFound(iri.to_string()))
    }

    fn view(&self, id: u32, filter: &RelationFilter) -> GraphNode {
        let n = &self.nodes[id as usize];
        GraphNode {
            iri: n.iri.clone(),
            ontology_id: self.ontology_id.clone(),
            label: n.label.clone(),
            is_obsolete: n.is_obsolete,
            defining_ontology: n.defining_ontology.clone(),
            has_children: self.inc[id as usize].iter().any(|&(r, _)| filter.allows(r)),
        }
    }

    fn label_sorted(&self, mut ids: Vec<u32>, filter: &RelationFilter) -> Vec<GraphNode> {
        ids.sort_unstable();
        ids.dedup();
        ids.sort_by(|&a, &b| {
            let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
            (na.label.is_none(), &na.label, &na.iri).cmp(&(nb.label.is_none(), &nb.label, &nb.iri))
        });
        ids.into_iter().map(|i| self.view(i, filter)).collect()
    }

    fn step<'a>(adjacency: &'a [(u16, u32)], filter: &'a RelationFilter) -> impl Iterator<Item = u32> + 'a {
        adjacency.iter().filter(move |(r, _)| filter.allows(*r)).map(|&(_, n)| n)
    }

    /// Direct parents, sorted by label then IRI.
    pub fn parents(&self, iri: &str, filter: &RelationFilter) -> Result<Vec<GraphNode>, GraphError> {
        let id = self.id(iri)?;
        Ok(self.label_sorted(Self::step(&self.out[id as usize], filter).collect(), filter))
    }

    /// Direct children, sorted by label then IRI.
    pub fn children(&self, iri: &str, filter: &RelationFilter) -> Result<Vec<GraphNode>, GraphError> {
        let id = self.id(iri)?;
        Ok(self.label_sorted(Self::step(&self.inc[id as usize], filter).collect(), filter))
    }

    fn bfs(&self, start: u32, up: bool, filter: &RelationFilter, cap: usize) -> Traversal {
        let adjacency = if up { &self.out } else { &self.inc };
        let mut visited: HashSet<u32> = HashSet::from([start]);
        let mut frontier = vec![start];
        let mut result = Vec::new();
        while !frontier.is_empty() {
            let mut next: Vec<u32> = Vec::new();
            for &n in &frontier {
                for m in Self::step(&adjacency[n as usize], filter) {
                    if visited.insert(m) {
                        next.push(m);
                    }
                }
            }
            next.sort_by(|&a, &b| self.nodes[a as usize].iri.cmp(&self.nodes[b as usize].iri));
            for &m in &next {
                if result.len() == cap {
                    return Traversal {
                        nodes: result,
                        truncated: true,
                    };
                }
                result.push(self.view(m, filter));
            }
            frontier = next;
        }
        Traversal {
            nodes: result,
            truncated: false,
        }
    }

    /// Every node reachable over parent edges, breadth first, ties by IRI.
    pub fn ancestors(&self, iri: &str, filter: &RelationFilter, cap: usize) -> Result<Traversal, GraphError> {
        Ok(self.bfs(self.id(iri)?, true, filter, cap))
    }

    pub fn descendants(&self, iri: &str, filter: &RelationFilter, cap: usize) -> Result<Traversal, GraphError> {
        Ok(self.bfs(self.id(iri)?, false, filter, cap))
    }

    /// Class nodes without outgoing filtered edges, label-sorted.
    pub fn roots(&self, filter: &RelationFilter, include_obsolete: bool) -> Vec<GraphNode> {
        let ids: Vec<u32> = (0..self.nodes.len() as u32)
            .filter(|&i| {
                let n = &self.nodes[i as usize];
                n.is_class
                    && n.has_record
                    && (include_obsolete || !n.is_obsolete)
                    && Self::step(&self.out[i as usize], filter).next().is_none()
            })
            .collect();
        self.label_sorted(ids, filter)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(MAGIC);
        w.extend_from_slice(&VERSION.to_le_bytes());
        put_str(&mut w, &self.ontology_id);
        w.extend_from_slice(&(self.relations.len() as u32).to_le_bytes());
        for r in &self.relations {
            put_str(&mut w, r);
        }
        w.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        for n in &self.nodes {
            put_str(&mut w, &n.iri);
            put_opt(&mut w, n.label.as_deref());
            put_opt(&mut w, n.defining_ontology.as_deref());
            let flags = (n.is_obsolete as u8) | ((n.is_class as u8) << 1) | ((n.has_record as u8) << 2);
            w.push(flags);
        }
        let edges: Vec<(u32, u16, u32)> = self
            .out
            .iter()
            .enumerate()
            .flat_map(|(s, ts)| ts.iter().map(move |&(r, t)| (s as u32, r, t)))
            .collect();
        w.extend_from_slice(&(edges.len() as u32).to_le_bytes());
        for (s, r, t) in edges {
            w.extend_from_slice(&s.to_le_bytes());
            w.extend_from_slice(&r.to_le_bytes());
            w.extend_from_slice(&t.to_le_bytes());
        }
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, GraphError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(GraphError::Corrupt("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(GraphError::Corrupt(format!("unsupported version {version}")));
        }
        let ontology_id = r.string()?;
        let n_rel = r.u32()? as usize;
        let relations = (0..n_rel).map(|_| r.string()).collect::<Result<Vec<_>, _>>()?;
        let n_nodes = r.u32()? as usize;
        let mut g = OntologyGraph {
            ontology_id,
            relations,
            nodes: Vec::with_capacity(n_nodes),
            lookup: HashMap::with_capacity(n_nodes),
            out: Vec::with_capacity(n_nodes),
            inc: Vec::with_capacity(n_nodes),
        };
        for _ in 0..n_nodes {
            let iri = r.string()?;
            let label = r.opt()?;
            let defining_ontology = r.opt()?;
            let flags = r.take(1)?[0];
            g.push(NodeData {
                iri,
                label,
                is_obsolete: flags & 1 != 0,
                is_class: flags & 2 != 0,
                has_record: flags & 4 != 0,
                defining_ontology,
            });
        }
        let n_edges = r.u32()? as usize;
        for _ in 0..n_edges {
            let s = r.u32()?;
            let rel = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
            let t = r.u32()?;
            if s as usize >= n_nodes || t as usize >= n_nodes || rel as usize >= n_rel {
                return Err(GraphError::Corrupt("edge out of range".into()));
            }
            g.out[s as usize].push((rel, t));
            g.inc[t as usize].push((rel, s));
        }
        if r.pos != bytes.len() {
            return Err(GraphError::Corrupt("trailing bytes".into()));
        }
        Ok(g)
    }
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    w.extend_from_slice(&(s.len() as u32).to_le_bytes());
    w.extend_from_slice(s.as_bytes());
}

fn put_opt(w: &mut Vec<u8>, s: Option<&str>) {
    match s {
        Some(s) => {
            w.push(1);
            put_str(w, s);
        }
        None => w.push(0),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], GraphError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| GraphError::Corrupt("unexpected end of segment".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, GraphError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn string(&mut self) -> Result<String, GraphError> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| GraphError::Corrupt("invalid UTF-8".into()))
    }

    fn opt(&mut self) -> Result<Option<String>, GraphError> {
        match self.take(1)?[0] {
            0 => Ok(None),
            1 => self.string().map(Some),
            _ => Err(GraphError::Corrupt("bad option tag".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(iri: &str) -> NodeInput {
        NodeInput {
            iri: iri.into(),
            label: Some(iri.into()),
            is_class: true,
            ..Default::default()
        }
    }

    fn edge(s: &str, t: &str) -> GraphEdge {
        GraphEdge {
            source: s.into(),
            relation: SUBCLASS_OF.into(),
            target: t.into(),
        }
    }

    fn graph(pairs: &[(&str, &str)]) -> OntologyGraph {
        let mut iris: Vec<&str> = pairs.iter().flat_map(|(a, b)| [*a, *b]).collect();
        iris.sort();
        iris.dedup();
        OntologyGraph::build(
            "t",
            &[],
            iris.into_iter().map(node).collect(),
            &pairs.iter().map(|(a, b)| edge(a, b)).collect::<Vec<_>>(),
        )
    }

    fn iris(nodes: &[GraphNode]) -> Vec<&str> {
        nodes.iter().map(|n| n.iri.as_str()).collect()
    }

    #[test]
    fn chain() {
        let g = graph(&[("a", "b"), ("b", "c")]);
        let f = g.subclass_filter();
        assert_eq!(iris(&g.ancestors("a", &f, DEFAULT_CAP).unwrap().nodes), ["b", "c"]);
        assert_eq!(iris(&g.descendants("c", &f, DEFAULT_CAP).unwrap().nodes), ["b", "a"]);
        assert_eq!(iris(&g.parents("a", &f).unwrap()), ["b"]);
        assert_eq!(iris(&g.children("b", &f).unwrap()), ["a"]);
        assert_eq!(iris(&g.roots(&f, false)), ["c"]);
        assert!(g.parents("c", &f).unwrap().is_empty());
        assert_eq!(g.parents("zz", &f), Err(GraphError::NotFound("zz".into())));
    }

    #[test]
    fn diamond() {
        let g = graph(&[("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")]);
        let f = g.subclass_filter();
        assert_eq!(iris(&g.ancestors("a", &f, DEFAULT_CAP).unwrap().nodes), ["b", "c", "d"]);
        assert_eq!(iris(&g.descendants("d", &f, DEFAULT_CAP).unwrap().nodes), ["b", "c", "a"]);
        assert_eq!(iris(&g.children("d", &f).unwrap()), ["b", "c"]);
    }

    #[test]
    fn cycles_terminate() {
        let g = graph(&[("a", "b"), ("b", "a"), ("c", "c")]);
        let f = g.subclass_filter();
        assert_eq!(iris(&g.ancestors("a", &f, DEFAULT_CAP).unwrap().nodes), ["b"]);
        assert!(g.ancestors("c", &f, DEFAULT_CAP).unwrap().nodes.is_empty());
    }

    #[test]
    fn relation_filtering() {
        let part_of = "http://purl.obolibrary.org/obo/BFO_0000050".to_string();
        let g = OntologyGraph::build(
            "t",
            std::slice::from_ref(&part_of),
            vec![node("lobe"), node("lung"), node("organ")],
            &[
                edge("lobe", "organ"),
                GraphEdge {
                    source: "lobe".into(),
                    relation: part_of.clone(),
                    target: "lung".into(),
                },
                GraphEdge {
                    source: "lobe".into(),
                    relation: "http://x/unconfigured".into(),
                    target: "lung".into(),
                },
            ],
        );
        assert_eq!(g.edge_count(), 2);
        assert_eq!(iris(&g.parents("lobe", &g.subclass_filter()).unwrap()), ["organ"]);
        assert_eq!(iris(&g.parents("lobe", &g.all_filter()).unwrap()), ["lung", "organ"]);
        assert_eq!(iris(&g.parents("lobe", &g.filter(Some(&[part_of.as_str()])).unwrap()).unwrap()), ["lung"]);
        assert!(g.filter(Some(&["bogus"])).is_err());
    }

    #[test]
    fn roots_skip_obsolete_by_default() {
        let mut n = node("a");
        n.is_obsolete = true;
        let g = OntologyGraph::build("t", &[], vec![n], &[]);
        let f = g.subclass_filter();
        assert!(g.roots(&f, false).is_empty());
        assert_eq!(g.roots(&f, true).len(), 1);
    }

    #[test]
    fn cap_truncates() {
        let g = graph(&[("a", "b"), ("b", "c"), ("c", "d")]);
        let t = g.ancestors("a", &g.subclass_filter(), 2).unwrap();
        assert_eq!(iris(&t.nodes), ["b", "c"]);
        assert!(t.truncated);
    }

    #[test]
    fn binary_round_trip() {
        let g = graph(&[("a", "b"), ("a", "c"), ("b", "d")]);
        let back = OntologyGraph::from_bytes(&g.to_bytes()).unwrap();
        assert_eq!(back, g);
        assert!(OntologyGraph::from_bytes(b"nope").is_err());
        let mut bytes = g.to_bytes();
        bytes.push(0);
        assert!(OntologyGraph::from_bytes(&bytes).is_err());
    }
}

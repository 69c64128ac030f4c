//! Property graph model shared by every stage of the pipeline.
//!
//! Nodes carry dense ids `0..n`, a kind and an ordered attribute map. Edges are
//! undirected typed triples; two edges between the same pair are allowed only
//! when their relation types differ.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("duplicate or non-dense node id {0}")]
    DuplicateNode(u32),
    #[error("edge ({src}, {dst}) references a missing node")]
    DanglingEdge { src: u32, dst: u32 },
    #[error("self loop on node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge ({0}, {1}, {2})")]
    DuplicateEdge(u32, u32, Relation),
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("no component survived the size filter")]
    EmptyResult,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v as u32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Person,
    Org,
}

/// Relation types between people. Nine kinds, serialized in lowercase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    Knows,
    Colleague,
    Friend,
    Neighbor,
    Household,
    Classmate,
    Sibling,
    Parent,
    Spouse,
}

impl Relation {
    pub const ALL: [Relation; 9] = [
        Relation::Knows,
        Relation::Colleague,
        Relation::Friend,
        Relation::Neighbor,
        Relation::Household,
        Relation::Classmate,
        Relation::Sibling,
        Relation::Parent,
        Relation::Spouse,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Knows => "knows",
            Relation::Colleague => "colleague",
            Relation::Friend => "friend",
            Relation::Neighbor => "neighbor",
            Relation::Household => "household",
            Relation::Classmate => "classmate",
            Relation::Sibling => "sibling",
            Relation::Parent => "parent",
            Relation::Spouse => "spouse",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown relation {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl Node {
    pub fn person(id: impl Into<NodeId>) -> Self {
        Node { id: id.into(), kind: NodeKind::Person, attributes: BTreeMap::new() }
    }

    pub fn with_attr(mut self, key: &str, value: &str) -> Self {
        self.attributes.insert(key.to_string(), value.to_string());
        self
    }

    pub fn attr(&self, key: &str) -> Option<&str> {
        self.attributes.get(key).map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub src: NodeId,
    pub dst: NodeId,
    pub relation: Relation,
    #[serde(default)]
    pub properties: BTreeMap<String, String>,
}

impl Edge {
    pub fn new(src: impl Into<NodeId>, dst: impl Into<NodeId>, relation: Relation) -> Self {
        Edge { src: src.into(), dst: dst.into(), relation, properties: BTreeMap::new() }
    }

    /// Endpoints in ascending order.
    pub fn key(&self) -> (NodeId, NodeId) {
        if self.src <= self.dst {
            (self.src, self.dst)
        } else {
            (self.dst, self.src)
        }
    }

    pub fn other(&self, u: NodeId) -> NodeId {
        if self.src == u {
            self.dst
        } else {
            self.src
        }
    }
}

/// Immutable undirected property graph.
#[derive(Debug, Clone)]
pub struct PropertyGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<NodeId>>,
    incident: Vec<Vec<usize>>,
}

impl PartialEq for PropertyGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl PropertyGraph {
    /// Validates nodes and edges and builds the adjacency index.
    pub fn build(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        let n = nodes.len();
        let mut seen = vec![false; n];
        for node in &nodes {
            let i = node.id.index();
            if i >= n || seen[i] {
                return Err(GraphError::DuplicateNode(node.id.0));
            }
            seen[i] = true;
        }
        let mut nodes = nodes;
        nodes.sort_by_key(|nd| nd.id);

        let mut triples = BTreeSet::new();
        let mut neighbor_sets: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
        let mut incident = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            if e.src == e.dst {
                return Err(GraphError::SelfLoop(e.src.0));
            }
            if e.src.index() >= n || e.dst.index() >= n {
                return Err(GraphError::DanglingEdge { src: e.src.0, dst: e.dst.0 });
            }
            let (a, b) = e.key();
            if !triples.insert((a, b, e.relation)) {
                return Err(GraphError::DuplicateEdge(a.0, b.0, e.relation));
            }
            neighbor_sets[a.index()].insert(b);
            neighbor_sets[b.index()].insert(a);
            incident[a.index()].push(ei);
            incident[b.index()].push(ei);
        }
        let neighbors = neighbor_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(PropertyGraph { nodes, edges, neighbors, incident })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    /// Distinct neighbors of `u`, ascending.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[u.index()]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.neighbors[u.index()].len()
    }

    /// Indices into [`edges`](Self::edges) of every edge touching `u`.
    pub fn incident_edges(&self, u: NodeId) -> impl Iterator<Item = &Edge> {
        self.incident[u.index()].iter().map(move |&i| &self.edges[i])
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors[u.index()].binary_search(&v).is_ok()
    }

    /// Relations on the edges joining `u` and `v`.
    pub fn relations_between(&self, u: NodeId, v: NodeId) -> Vec<Relation> {
        let mut rels: Vec<Relation> =
            self.incident_edges(u).filter(|e| e.other(u) == v).map(|e| e.relation).collect();
        rels.sort();
        rels
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.nodes.len()
    }

    /// Distinct undirected node pairs that carry at least one edge, ascending.
    pub fn edge_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (i, ns) in self.neighbors.iter().enumerate() {
            for &v in ns {
                if v.index() > i {
                    out.push((NodeId(i as u32), v));
                }
            }
        }
        out
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let cid = out.len();
            let mut members = vec![NodeId(start as u32)];
            comp[start] = cid;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &self.neighbors[u] {
                    if comp[v.index()] == usize::MAX {
                        comp[v.index()] = cid;
                        members.push(v);
                        queue.push_back(v.index());
                    }
                }
            }
            members.sort();
            out.push(members);
        }
        out
    }

    /// Induced subgraph on the given nodes, re-densified in ascending old-id order.
    pub fn induced_subgraph(&self, keep: &[NodeId]) -> FilteredGraph {
        let mut keep: Vec<NodeId> = keep.to_vec();
        keep.sort();
        keep.dedup();
        let mut old_to_new = HashMap::with_capacity(keep.len());
        for (new, &old) in keep.iter().enumerate() {
            old_to_new.insert(old, NodeId(new as u32));
        }
        let nodes = keep
            .iter()
            .map(|&old| {
                let mut nd = self.nodes[old.index()].clone();
                nd.id = old_to_new[&old];
                nd
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| {
                let s = old_to_new.get(&e.src)?;
                let d = old_to_new.get(&e.dst)?;
                Some(Edge { src: *s, dst: *d, relation: e.relation, properties: e.properties.clone() })
            })
            .collect();
        let graph = PropertyGraph::build(nodes, edges).expect("induced subgraph of a valid graph");
        FilteredGraph { graph, new_to_old: keep, old_to_new }
    }

    /// Keeps only components with at least `min_size` nodes.
    pub fn filter_components(&self, min_size: usize) -> Result<FilteredGraph, GraphError> {
        let min_size = min_size.max(1);
        let keep: Vec<NodeId> = self
            .connected_components()
            .into_iter()
            .filter(|c| c.len() >= min_size)
            .flatten()
            .collect();
        if keep.is_empty() {
            return Err(GraphError::EmptyResult);
        }
        Ok(self.induced_subgraph(&keep))
    }

    /// Same nodes with a different edge list.
    pub fn with_edges(&self, edges: Vec<Edge>) -> Result<Self, GraphError> {
        PropertyGraph::build(self.nodes.clone(), edges)
    }

    /// Same structure with replaced nodes (ids must match).
    pub fn with_nodes(&self, nodes: Vec<Node>) -> Result<Self, GraphError> {
        PropertyGraph::build(nodes, self.edges.clone())
    }

    /// Hop distances from `source` to every node within `cutoff` hops.
    pub fn bfs_distances(&self, source: NodeId, cutoff: u32) -> Result<DistanceRow, GraphError> {
        if !self.contains(source) {
            return Err(GraphError::UnknownNode(source.0));
        }
        let mut dist = HashMap::new();
        dist.insert(source, 0u32);
        let mut frontier = vec![source];
        let mut d = 0;
        while d < cutoff && !frontier.is_empty() {
            d += 1;
            let mut next = Vec::new();
            for u in frontier {
                for &v in self.neighbors(u) {
                    if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(v) {
                        slot.insert(d);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        let mut entries: Vec<(NodeId, u32)> = dist.into_iter().collect();
        entries.sort();
        Ok(DistanceRow { source, entries })
    }

    pub fn save(&self, dir: &Path) -> Result<(), GraphError> {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("nodes.jsonl"))?);
        for node in &self.nodes {
            serde_json::to_writer(&mut w, node).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        let mut w = BufWriter::new(File::create(dir.join("edges.jsonl"))?);
        for e in &self.edges {
            serde_json::to_writer(&mut w, e).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, GraphError> {
        let nodes: Vec<Node> = read_jsonl(&dir.join("nodes.jsonl"))?;
        let edges: Vec<Edge> = read_jsonl(&dir.join("edges.jsonl"))?;
        PropertyGraph::build(nodes, edges).map_err(|e| match e {
            GraphError::Io(io) => GraphError::Io(io),
            other => GraphError::SchemaMismatch(other.to_string()),
        })
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, GraphError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| {
            GraphError::SchemaMismatch(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Result of a component filter or induced-subgraph extraction.
#[derive(Debug, Clone)]
pub struct FilteredGraph {
    pub graph: PropertyGraph,
    /// `new_to_old[new.index()]` is the id in the source graph.
    pub new_to_old: Vec<NodeId>,
    pub old_to_new: HashMap<NodeId, NodeId>,
}

/// Truncated single-source distances: entries exist only for nodes within the cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceRow {
    pub source: NodeId,
    /// Sorted by node id.
    pub entries: Vec<(NodeId, u32)>,
}

impl DistanceRow {
    pub fn get(&self, node: NodeId) -> Option<u32> {
        self.entries.binary_search_by_key(&node, |&(n, _)| n).ok().map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Truncated distances from a set of sources. Missing entries mean "beyond cutoff".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceCache {
    pub cutoff: u32,
    rows: BTreeMap<NodeId, DistanceRow>,
}

impl DistanceCache {
    /// Computes one BFS row per source. Rows are built on scoped worker threads
    /// and stored by source id, so the result does not depend on scheduling.
    pub fn build(g: &PropertyGraph, sources: &[NodeId], cutoff: u32) -> Result<Self, GraphError> {
        let mut uniq: Vec<NodeId> = sources.to_vec();
        uniq.sort();
        uniq.dedup();
        if let Some(bad) = uniq.iter().find(|s| !g.contains(**s)) {
            return Err(GraphError::UnknownNode(bad.0));
        }
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
        let chunk = uniq.len().div_ceil(workers).max(1);
        let rows: Vec<DistanceRow> = std::thread::scope(|scope| {
            let handles: Vec<_> = uniq
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&s| g.bfs_distances(s, cutoff).expect("validated source"))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("bfs worker panicked")).collect()
        });
        Ok(DistanceCache { cutoff, rows: rows.into_iter().map(|r| (r.source, r)).collect() })
    }

    pub fn row(&self, source: NodeId) -> Option<&DistanceRow> {
        self.rows.get(&source)
    }

    /// Distance between `a` and `b` if either one is a cached source and the
    /// pair lies within the cutoff.
    pub fn distance(&self, a: NodeId, b: NodeId) -> Option<u32> {
        if a == b {
            return Some(0);
        }
        if let Some(r) = self.rows.get(&a) {
            return r.get(b);
        }
        self.rows.get(&b).and_then(|r| r.get(a))
    }

    pub fn sources(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.rows.keys().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> PropertyGraph {
        let nodes = (0..3).map(Node::person).collect();
        let edges = vec![Edge::new(0usize, 1usize, Relation::Knows), Edge::new(1usize, 2usize, Relation::Knows)];
        PropertyGraph::build(nodes, edges).unwrap()
    }

    #[test]
    fn path_degrees() {
        let g = path3();
        let degs: Vec<_> = (0..3).map(|i| g.degree(NodeId(i))).collect();
        assert_eq!(degs, vec![1, 2, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        let nodes: Vec<Node> = (0..6).map(Node::person).collect();
        let err = PropertyGraph::build(nodes.clone(), vec![Edge::new(5usize, 5usize, Relation::Knows)]);
        assert!(matches!(err, Err(GraphError::SelfLoop(5))));
        let err = PropertyGraph::build(nodes.clone(), vec![Edge::new(0usize, 9usize, Relation::Knows)]);
        assert!(matches!(err, Err(GraphError::DanglingEdge { .. })));
        let dup = vec![Edge::new(0usize, 1usize, Relation::Knows), Edge::new(1usize, 0usize, Relation::Knows)];
        assert!(matches!(PropertyGraph::build(nodes.clone(), dup), Err(GraphError::DuplicateEdge(..))));
        let multi = vec![Edge::new(0usize, 1usize, Relation::Knows), Edge::new(1usize, 0usize, Relation::Spouse)];
        let g = PropertyGraph::build(nodes.clone(), multi).unwrap();
        assert_eq!(g.degree(NodeId(0)), 1);
        assert_eq!(g.relations_between(NodeId(1), NodeId(0)), vec![Relation::Knows, Relation::Spouse]);
        let mut bad = nodes;
        bad[3].id = NodeId(2);
        assert!(matches!(PropertyGraph::build(bad, vec![]), Err(GraphError::DuplicateNode(2))));
    }

    #[test]
    fn bfs_truncation() {
        let g = path3();
        let row = g.bfs_distances(NodeId(0), 5).unwrap();
        assert_eq!(row.entries, vec![(NodeId(0), 0), (NodeId(1), 1), (NodeId(2), 2)]);
        let row = g.bfs_distances(NodeId(0), 1).unwrap();
        assert_eq!(row.entries, vec![(NodeId(0), 0), (NodeId(1), 1)]);
        assert!(matches!(g.bfs_distances(NodeId(7), 1), Err(GraphError::UnknownNode(7))));
    }

    #[test]
    fn components_and_filter() {
        let empty = PropertyGraph::build(vec![], vec![]).unwrap();
        assert!(empty.connected_components().is_empty());

        // triangle + 12-node path
        let nodes: Vec<Node> = (0..15).map(Node::person).collect();
        let mut edges = vec![
            Edge::new(0usize, 1usize, Relation::Knows),
            Edge::new(1usize, 2usize, Relation::Knows),
            Edge::new(0usize, 2usize, Relation::Knows),
        ];
        for i in 3..14usize {
            edges.push(Edge::new(i, i + 1, Relation::Friend));
        }
        let g = PropertyGraph::build(nodes, edges).unwrap();
        let sizes: Vec<_> = g.connected_components().iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 12]);
        let f = g.filter_components(10).unwrap();
        assert_eq!(f.graph.node_count(), 12);
        assert_eq!(f.graph.edge_count(), 11);
        assert_eq!(f.new_to_old[0], NodeId(3));
        let again = f.graph.filter_components(10).unwrap();
        assert_eq!(again.graph, f.graph);
        let ident = g.filter_components(1).unwrap();
        assert_eq!(ident.graph, g);
        assert!(matches!(g.filter_components(13), Err(GraphError::EmptyResult)));
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut g_nodes: Vec<Node> = (0..3).map(Node::person).collect();
        g_nodes[1] = g_nodes[1].clone().with_attr("surname", "ŁUKASZ");
        let mut e = Edge::new(0usize, 2usize, Relation::Spouse);
        e.properties.insert("duration".into(), "12y".into());
        let g = PropertyGraph::build(g_nodes, vec![e]).unwrap();
        g.save(dir.path()).unwrap();
        assert_eq!(PropertyGraph::load(dir.path()).unwrap(), g);

        std::fs::write(dir.path().join("edges.jsonl"), "{\"src\":0,\"dst\":7,\"relation\":\"knows\"}\n").unwrap();
        assert!(matches!(PropertyGraph::load(dir.path()), Err(GraphError::SchemaMismatch(_))));
    }
}

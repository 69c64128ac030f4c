//! Explanations for a predicted link: ranked connecting paths, supporting
//! text retrieved from the unstructured source, and an attribute-level
//! comparison of the two nodes.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Node, NodeId, PropertyGraph, Relation};
use crate::linkpred::PredictedLink;
use crate::matching::standardize_value;
use crate::sources::{render_sentences, Source, SourceRecord};
use crate::text::edit_similarity;

pub const DEFAULT_MAX_LEN: usize = 4;
pub const MAX_ALLOWED_LEN: usize = 6;
pub const DEFAULT_MAX_PATHS: usize = 100;
pub const DEFAULT_TOP_PATHS: usize = 3;
pub const DEFAULT_TOP_SNIPPETS: usize = 5;
pub const SNIPPET_WINDOW: usize = 15;

/// Attributes that describe provenance rather than the person.
const LINEAGE_ATTRS: &[&str] = &["entity_id", "entity_key", "record_count", "record_ids", "ingested_at", "source_system"];

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("no stored prediction for the pair ({0}, {1})")]
    UnknownPrediction(NodeId, NodeId),
    #[error("node {0} is not in the graph")]
    UnknownNode(NodeId),
}

/// A simple path as a node sequence and the relation of each hop.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GraphPath {
    pub nodes: Vec<NodeId>,
    pub relations: Vec<Relation>,
}

impl GraphPath {
    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// True when every hop is an edge of `g` with the stated relation and no node repeats.
    pub fn exists_in(&self, g: &PropertyGraph) -> bool {
        let distinct: BTreeSet<&NodeId> = self.nodes.iter().collect();
        distinct.len() == self.nodes.len()
            && self.nodes.len() == self.relations.len() + 1
            && self.nodes.iter().all(|&n| g.contains(n))
            && self.nodes.windows(2).zip(&self.relations).all(|(w, r)| g.relations_between(w[0], w[1]).contains(r))
    }
}

/// Simple paths from `u` to `v` with at most `max_len` edges, shortest first.
/// Within a length, paths come in breadth-first order over ascending
/// neighbour ids; parallel edges give one path per relation. At most
/// `max_paths` are returned.
pub fn enumerate_paths(g: &PropertyGraph, u: NodeId, v: NodeId, max_len: usize, max_paths: usize) -> Vec<GraphPath> {
    if u == v || !g.contains(u) || !g.contains(v) || max_paths == 0 {
        return Vec::new();
    }
    let max_len = max_len.min(MAX_ALLOWED_LEN);
    // Hop distance to v bounds which partial paths can still arrive in time.
    let to_v = match g.bfs_distances(v, max_len as u32) {
        Ok(row) => row,
        Err(_) => return Vec::new(),
    };
    if to_v.get(u).is_none() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut queue: VecDeque<Vec<NodeId>> = VecDeque::from([vec![u]]);
    while let Some(partial) = queue.pop_front() {
        let last = *partial.last().expect("non-empty");
        let used = partial.len() - 1;
        for &w in g.neighbors(last) {
            if partial.contains(&w) {
                continue;
            }
            let Some(rest) = to_v.get(w) else { continue };
            if used + 1 + rest as usize > max_len {
                continue;
            }
            let mut next = partial.clone();
            next.push(w);
            if w == v {
                for path in expand_relations(g, &next) {
                    out.push(path);
                    if out.len() == max_paths {
                        return out;
                    }
                }
            } else {
                queue.push_back(next);
            }
        }
    }
    out
}

fn expand_relations(g: &PropertyGraph, nodes: &[NodeId]) -> Vec<GraphPath> {
    let mut paths = vec![Vec::new()];
    for w in nodes.windows(2) {
        let rels = g.relations_between(w[0], w[1]);
        paths = paths
            .into_iter()
            .flat_map(|p: Vec<Relation>| {
                rels.iter().map(move |&r| {
                    let mut q = p.clone();
                    q.push(r);
                    q
                })
            })
            .collect();
    }
    paths.into_iter().map(|relations| GraphPath { nodes: nodes.to_vec(), relations }).collect()
}

/// Relative frequency of each relation type among the edges of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationStats {
    pub frequency: BTreeMap<Relation, f64>,
    pub edges: usize,
}

impl RelationStats {
    pub fn from_graph(g: &PropertyGraph) -> Self {
        let mut counts: BTreeMap<Relation, usize> = BTreeMap::new();
        for e in g.edges() {
            *counts.entry(e.relation).or_default() += 1;
        }
        let total = g.edge_count().max(1) as f64;
        let frequency = counts.into_iter().map(|(r, c)| (r, c as f64 / total)).collect();
        RelationStats { frequency, edges: g.edge_count() }
    }

    /// `log(1 / freq)`; an unseen relation gets frequency `1 / (edges + 1)`.
    pub fn rarity(&self, r: Relation) -> f64 {
        let unseen = 1.0 / (self.edges + 1) as f64;
        let f = self.frequency.get(&r).copied().filter(|f| *f > 0.0).unwrap_or(unseen);
        -f.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeTerm {
    pub from: NodeId,
    pub to: NodeId,
    pub relation: Relation,
    pub rarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedPath {
    pub rank: usize,
    pub path: GraphPath,
    pub score: f64,
    pub breakdown: Vec<EdgeTerm>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PathExplanation {
    pub paths: Vec<RankedPath>,
}

/// Sum of per-edge relation rarity divided by the squared path length.
pub fn score_path(stats: &RelationStats, path: &GraphPath) -> f64 {
    if path.is_empty() {
        return 0.0;
    }
    let sum: f64 = path.relations.iter().map(|&r| stats.rarity(r)).sum();
    sum / (path.len() * path.len()) as f64
}

pub fn rank_paths(g: &PropertyGraph, paths: &[GraphPath], top_k: usize) -> PathExplanation {
    rank_paths_with(&RelationStats::from_graph(g), paths, top_k)
}

/// Highest score first; equal scores fall back to the node id sequence, then
/// the relation sequence.
pub fn rank_paths_with(stats: &RelationStats, paths: &[GraphPath], top_k: usize) -> PathExplanation {
    let mut scored: Vec<(f64, &GraphPath)> = paths.iter().map(|p| (score_path(stats, p), p)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
    let paths = scored
        .into_iter()
        .take(top_k)
        .enumerate()
        .map(|(i, (score, p))| RankedPath {
            rank: i + 1,
            score,
            breakdown: p
                .nodes
                .windows(2)
                .zip(&p.relations)
                .map(|(w, &relation)| EdgeTerm { from: w[0], to: w[1], relation, rarity: stats.rarity(relation) })
                .collect(),
            path: p.clone(),
        })
        .collect();
    PathExplanation { paths }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub record_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: usize,
    pub positions: Vec<usize>,
}

/// Inverted index over lowercased, punctuation-stripped tokens. Token byte
/// spans are kept so snippets are cut from the original text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextIndex {
    docs: Vec<Document>,
    spans: Vec<Vec<(usize, usize)>>,
    postings: BTreeMap<String, Vec<Posting>>,
}

/// Tokens with their byte spans in `text`.
pub fn tokenize(text: &str) -> Vec<(String, (usize, usize))> {
    let mut out = Vec::new();
    let mut offset = 0;
    for piece in text.split_whitespace() {
        let start = offset + text[offset..].find(piece).expect("piece comes from text");
        offset = start + piece.len();
        let token: String = piece.chars().filter(|c| c.is_alphanumeric()).flat_map(char::to_lowercase).collect();
        if !token.is_empty() {
            out.push((token, (start, offset)));
        }
    }
    out
}

impl TextIndex {
    pub fn build(documents: Vec<Document>) -> Self {
        let mut spans = Vec::with_capacity(documents.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (d, doc) in documents.iter().enumerate() {
            let tokens = tokenize(&doc.text);
            let mut positions: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
            for (i, (t, _)) in tokens.iter().enumerate() {
                positions.entry(t.as_str()).or_default().push(i);
            }
            for (t, positions) in positions {
                postings.entry(t.to_string()).or_default().push(Posting { doc: d, positions });
            }
            spans.push(tokens.into_iter().map(|(_, s)| s).collect());
        }
        TextIndex { docs: documents, spans, postings }
    }

    /// Indexes the rendered text of every unstructured record.
    pub fn from_records(records: &[SourceRecord]) -> Self {
        Self::build(
            records
                .iter()
                .filter(|r| r.source == Source::Unstructured)
                .map(|r| Document { record_id: r.record_id.clone(), text: render_sentences(&r.attributes) })
                .collect(),
        )
    }

    /// Reads a `record_id<TAB>text` corpus file.
    pub fn load(path: &FsPath) -> io::Result<Self> {
        let mut docs = Vec::new();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if let Some((id, text)) = line.split_once('\t') {
                docs.push(Document { record_id: id.to_string(), text: text.to_string() });
            }
        }
        Ok(Self::build(docs))
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn document(&self, doc: usize) -> Option<&Document> {
        self.docs.get(doc)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.postings.keys().map(String::as_str)
    }

    pub fn lookup(&self, token: &str) -> &[Posting] {
        self.postings.get(token).map(Vec::as_slice).unwrap_or(&[])
    }

    fn snippet(&self, doc: usize, positions: &[usize]) -> String {
        let spans = &self.spans[doc];
        let lo = positions.iter().min().copied().unwrap_or(0).saturating_sub(SNIPPET_WINDOW);
        let hi = (positions.iter().max().copied().unwrap_or(0) + SNIPPET_WINDOW).min(spans.len() - 1);
        self.docs[doc].text[spans[lo].0..spans[hi].1].to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub snippet: String,
    pub source_record_id: String,
    pub match_terms: Vec<String>,
    /// False when the document mentions only one endpoint.
    pub both_endpoints: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationEvidence {
    pub items: Vec<Evidence>,
}

/// Lowercased tokens of a node's name attributes.
pub fn name_tokens(node: &Node) -> BTreeSet<String> {
    ["given_name", "surname"]
        .iter()
        .filter_map(|a| node.attr(a))
        .flat_map(|v| tokenize(v).into_iter().map(|(t, _)| t))
        .collect()
}

/// Matched tokens of u, matched tokens of v, and token positions within one document.
type DocHits = (BTreeSet<String>, BTreeSet<String>, BTreeSet<usize>);

/// Documents mentioning the endpoints' names. Documents naming both rank
/// above single-endpoint ones, then by the number of matched name tokens,
/// then by record id.
pub fn retrieve_verification(index: &TextIndex, u: &Node, v: &Node, k: usize) -> VerificationEvidence {
    let (tu, tv) = (name_tokens(u), name_tokens(v));
    let mut hits: HashMap<usize, DocHits> = HashMap::new();
    for (tokens, side) in [(&tu, 0), (&tv, 1)] {
        for t in tokens {
            for p in index.lookup(t) {
                let e = hits.entry(p.doc).or_default();
                if side == 0 { &mut e.0 } else { &mut e.1 }.insert(t.clone());
                e.2.extend(&p.positions);
            }
        }
    }
    let mut ranked: Vec<(usize, DocHits)> = hits.into_iter().collect();
    let both = |h: &DocHits| !h.0.is_empty() && !h.1.is_empty();
    ranked.sort_by(|a, b| {
        both(&b.1)
            .cmp(&both(&a.1))
            .then((b.1 .0.len() + b.1 .1.len()).cmp(&(a.1 .0.len() + a.1 .1.len())))
            .then_with(|| index.docs[a.0].record_id.cmp(&index.docs[b.0].record_id))
    });
    let items = ranked
        .into_iter()
        .take(k)
        .map(|(doc, h)| {
            let positions: Vec<usize> = h.2.iter().copied().collect();
            let terms: BTreeSet<String> = h.0.iter().chain(&h.1).cloned().collect();
            Evidence {
                snippet: index.snippet(doc, &positions),
                source_record_id: index.docs[doc].record_id.clone(),
                match_terms: terms.into_iter().collect(),
                both_endpoints: both(&h),
            }
        })
        .collect();
    VerificationEvidence { items }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeComparison {
    pub value_u: String,
    pub value_v: String,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeComparison {
    pub attributes: BTreeMap<String, AttributeComparison>,
    pub neighbor_jaccard: f64,
}

/// Edit similarity of standardized values for every attribute both nodes
/// carry, and the Jaccard coefficient of their neighbour sets (0 when both
/// are isolated).
pub fn compare_nodes(g: &PropertyGraph, u: NodeId, v: NodeId) -> Result<NodeComparison, ExplainError> {
    let nu = g.node(u).ok_or(ExplainError::UnknownNode(u))?;
    let nv = g.node(v).ok_or(ExplainError::UnknownNode(v))?;
    let attributes = nu
        .attributes
        .iter()
        .filter(|(k, _)| !LINEAGE_ATTRS.contains(&k.as_str()))
        .filter_map(|(k, a)| {
            let b = nv.attr(k)?;
            let similarity = edit_similarity(&standardize_value(k, a), &standardize_value(k, b));
            Some((k.clone(), AttributeComparison { value_u: a.clone(), value_v: b.to_string(), similarity }))
        })
        .collect();
    let (a, b): (BTreeSet<NodeId>, BTreeSet<NodeId>) =
        (g.neighbors(u).iter().copied().collect(), g.neighbors(v).iter().copied().collect());
    let union = a.union(&b).count();
    let neighbor_jaccard = if union == 0 { 0.0 } else { a.intersection(&b).count() as f64 / union as f64 };
    Ok(NodeComparison { attributes, neighbor_jaccard })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainConfig {
    pub max_len: usize,
    pub max_paths: usize,
    pub top_paths: usize,
    pub top_snippets: usize,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            max_len: DEFAULT_MAX_LEN,
            max_paths: DEFAULT_MAX_PATHS,
            top_paths: DEFAULT_TOP_PATHS,
            top_snippets: DEFAULT_TOP_SNIPPETS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationBundle {
    pub u: NodeId,
    pub v: NodeId,
    pub score: f64,
    pub paths: PathExplanation,
    pub evidence: VerificationEvidence,
    pub comparison: NodeComparison,
}

/// All three explanations for a stored prediction of the pair, in either order.
pub fn explain_link(
    g: &PropertyGraph,
    index: &TextIndex,
    predictions: &[PredictedLink],
    u: NodeId,
    v: NodeId,
    config: &ExplainConfig,
) -> Result<ExplanationBundle, ExplainError> {
    let pred = predictions
        .iter()
        .find(|p| (p.watch, p.candidate) == (u, v) || (p.watch, p.candidate) == (v, u))
        .ok_or(ExplainError::UnknownPrediction(u, v))?;
    let nu = g.node(u).ok_or(ExplainError::UnknownNode(u))?;
    let nv = g.node(v).ok_or(ExplainError::UnknownNode(v))?;
    let paths = enumerate_paths(g, u, v, config.max_len, config.max_paths);
    Ok(ExplanationBundle {
        u,
        v,
        score: pred.probability,
        paths: rank_paths(g, &paths, config.top_paths),
        evidence: retrieve_verification(index, nu, nv, config.top_snippets),
        comparison: compare_nodes(g, u, v)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn graph(n: usize, edges: &[(usize, usize, Relation)]) -> PropertyGraph {
        let nodes = (0..n).map(Node::person).collect();
        PropertyGraph::build(nodes, edges.iter().map(|&(a, b, r)| Edge::new(a, b, r)).collect()).unwrap()
    }

    #[test]
    fn four_cycle_has_two_paths() {
        use Relation::Knows;
        let g = graph(4, &[(0, 1, Knows), (1, 2, Knows), (0, 3, Knows), (3, 2, Knows)]);
        let paths = enumerate_paths(&g, NodeId(0), NodeId(2), 4, 100);
        assert_eq!(paths.len(), 2);
        assert!(paths.iter().all(|p| p.len() == 2 && p.exists_in(&g)));
    }

    #[test]
    fn adjacent_and_disconnected() {
        use Relation::Knows;
        let g = graph(4, &[(0, 1, Knows), (1, 2, Knows), (0, 2, Knows)]);
        let paths = enumerate_paths(&g, NodeId(0), NodeId(1), 4, 100);
        assert_eq!(paths[0].nodes, vec![NodeId(0), NodeId(1)]);
        assert_eq!(paths.len(), 2);
        assert!(enumerate_paths(&g, NodeId(0), NodeId(3), 4, 100).is_empty());
    }

    #[test]
    fn truncation_keeps_shortest() {
        // Complete graph on 7 nodes: 1 direct, 5 two-hop and 20 three-hop paths.
        let mut edges = Vec::new();
        for a in 0..7 {
            for b in a + 1..7 {
                edges.push((a, b, Relation::Knows));
            }
        }
        let g = graph(7, &edges);
        let paths = enumerate_paths(&g, NodeId(0), NodeId(6), 3, 10);
        assert_eq!(paths.len(), 10);
        assert_eq!(paths[0].len(), 1);
        assert!(paths[1..6].iter().all(|p| p.len() == 2));
        assert!(paths[6..].iter().all(|p| p.len() == 3));
        assert_eq!(enumerate_paths(&g, NodeId(0), NodeId(6), 3, 1000).len(), 26);
    }

    #[test]
    fn snippets_are_substrings() {
        let text = "Alpha beta, gamma. Delta epsilon zeta eta theta iota kappa lambda mu nu xi omicron pi rho sigma tau upsilon phi chi psi omega one two";
        let idx = TextIndex::build(vec![Document { record_id: "d".into(), text: text.into() }]);
        let s = idx.snippet(0, &[0]);
        assert!(text.contains(&s));
        assert!(s.starts_with("Alpha") && s.ends_with(" pi"));
        assert_eq!(idx.lookup("beta")[0].positions, vec![1]);
    }
}

//! Held-out link split and endpoint-sharing negative sampling.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::LinkPredError;
use crate::graph::{NodeId, PropertyGraph};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinkSplit {
    /// Full graph minus every edge between held-out pairs.
    #[serde(skip)]
    pub train: Option<PropertyGraph>,
    pub train_pairs: Vec<(NodeId, NodeId)>,
    pub positives: Vec<(NodeId, NodeId)>,
    pub negatives: Vec<(NodeId, NodeId)>,
}

impl LinkSplit {
    pub fn train_graph(&self) -> &PropertyGraph {
        self.train.as_ref().expect("split built with a training graph")
    }
}

/// Number of held-out pairs for `pairs` links at `fraction`.
pub fn held_out_count(pairs: usize, fraction: f64) -> usize {
    // The small slack keeps exact products such as 0.1 * 100 from rounding up.
    ((fraction * pairs as f64) - 1e-9).ceil().max(1.0) as usize
}

/// Holds out `⌈fraction · |E|⌉` linked node pairs and samples an equal number
/// of negatives against the full graph. Links are counted as distinct node
/// pairs, so parallel edges between a held-out pair all leave the training graph.
pub fn split_links(g: &PropertyGraph, fraction: f64, seed: u64) -> Result<LinkSplit, LinkPredError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(LinkPredError::InvalidFraction(fraction));
    }
    let mut pairs = g.edge_pairs();
    if pairs.len() < 10 {
        return Err(LinkPredError::TooFewEdges { edges: pairs.len() });
    }
    let k = held_out_count(pairs.len(), fraction);
    let mut rng = rng::stream(seed, "link-split");
    pairs.shuffle(&mut rng);
    let mut positives: Vec<_> = pairs[..k].to_vec();
    let mut train_pairs: Vec<_> = pairs[k..].to_vec();
    positives.sort();
    train_pairs.sort();
    let held: BTreeSet<_> = positives.iter().copied().collect();
    let edges = g.edges().iter().filter(|e| !held.contains(&e.key())).cloned().collect();
    let train = g.with_edges(edges)?;
    let negatives = sample_negatives(g, &positives, seed)?;
    Ok(LinkSplit { train: Some(train), train_pairs, positives, negatives })
}

/// One negative per positive: a random endpoint of the positive paired with a
/// node it is not linked to in `g`. Negatives are distinct unless `g` has
/// fewer unconnected endpoint pairs than requested.
pub fn sample_negatives(
    g: &PropertyGraph,
    positives: &[(NodeId, NodeId)],
    seed: u64,
) -> Result<Vec<(NodeId, NodeId)>, LinkPredError> {
    let mut rng = rng::stream(seed, "negatives");
    sample_negatives_with(g, positives, positives.len(), &mut rng)
}

/// `count` negatives drawn by cycling through `positives`.
pub fn sample_negatives_with(
    g: &PropertyGraph,
    positives: &[(NodeId, NodeId)],
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<(NodeId, NodeId)>, LinkPredError> {
    let n = g.node_count();
    let mut used: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    if positives.is_empty() {
        return Ok(out);
    }
    let ordered = |a: NodeId, b: NodeId| if a <= b { (a, b) } else { (b, a) };
    let acceptable = |x: NodeId, w: NodeId, used: &BTreeSet<(NodeId, NodeId)>| {
        w != x && !g.has_edge(x, w) && !used.contains(&ordered(x, w))
    };
    for i in 0..count {
        let (u, v) = positives[i % positives.len()];
        let first = if rng.gen_bool(0.5) { u } else { v };
        let second = if first == u { v } else { u };
        let mut chosen = None;
        for _ in 0..32 {
            let w = NodeId(rng.gen_range(0..n) as u32);
            if acceptable(first, w, &used) {
                chosen = Some((first, w));
                break;
            }
        }
        if chosen.is_none() {
            // Dense neighbourhood: enumerate instead of rejecting forever.
            for x in [first, second] {
                let options: Vec<NodeId> =
                    (0..n as u32).map(NodeId).filter(|&w| acceptable(x, w, &used)).collect();
                if let Some(&w) = options.get(rng.gen_range(0..options.len().max(1))) {
                    chosen = Some((x, w));
                    break;
                }
            }
        }
        if chosen.is_none() {
            // Every unconnected pair is already used: allow a repeat.
            let empty = BTreeSet::new();
            for x in [first, second] {
                let options: Vec<NodeId> =
                    (0..n as u32).map(NodeId).filter(|&w| acceptable(x, w, &empty)).collect();
                if let Some(&w) = options.get(rng.gen_range(0..options.len().max(1))) {
                    chosen = Some((x, w));
                    break;
                }
            }
        }
        let (x, w) = chosen.ok_or(LinkPredError::ExhaustedCandidates { node: first.0 })?;
        let pair = ordered(x, w);
        used.insert(pair);
        out.push(pair);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node, Relation};

    fn path(n: usize) -> PropertyGraph {
        let nodes = (0..n).map(Node::person).collect();
        let edges = (1..n).map(|i| Edge::new(i - 1, i, Relation::Knows)).collect();
        PropertyGraph::build(nodes, edges).unwrap()
    }

    #[test]
    fn hundred_edges_hold_out_ten() {
        let s = split_links(&path(101), 0.1, 7).unwrap();
        assert_eq!(s.positives.len(), 10);
        assert_eq!(s.train_pairs.len(), 90);
        assert_eq!(s.train_graph().edge_count(), 90);
        assert!(s.positives.iter().all(|p| !s.train_pairs.contains(p)));
        assert_eq!(s.negatives.len(), 10);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(split_links(&path(101), 0.0, 1), Err(LinkPredError::InvalidFraction(_))));
        assert!(matches!(split_links(&path(5), 0.1, 1), Err(LinkPredError::TooFewEdges { edges: 4 })));
    }

    #[test]
    fn path_negative_shares_endpoint() {
        let g = path(4);
        let allowed = [(0u32, 2u32), (0, 3), (1, 3)];
        for seed in 0..50 {
            let neg = sample_negatives(&g, &[(NodeId(0), NodeId(1))], seed).unwrap();
            assert_eq!(neg.len(), 1);
            assert!(allowed.contains(&(neg[0].0 .0, neg[0].1 .0)), "{neg:?}");
        }
    }

    #[test]
    fn complete_graph_exhausts() {
        let nodes = (0..3).map(Node::person).collect();
        let edges = vec![
            Edge::new(0usize, 1usize, Relation::Knows),
            Edge::new(1usize, 2usize, Relation::Knows),
            Edge::new(0usize, 2usize, Relation::Knows),
        ];
        let g = PropertyGraph::build(nodes, edges).unwrap();
        assert!(matches!(
            sample_negatives(&g, &[(NodeId(0), NodeId(1))], 1),
            Err(LinkPredError::ExhaustedCandidates { .. })
        ));
    }

    #[test]
    fn deterministic_under_seed() {
        let g = path(60);
        let a = split_links(&g, 0.2, 3).unwrap();
        let b = split_links(&g, 0.2, 3).unwrap();
        assert_eq!(a.positives, b.positives);
        assert_eq!(a.negatives, b.negatives);
    }
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::score_link;
use super::train::LinkModel;
use super::LinkPredError;
use crate::graph::{NodeId, PropertyGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedLink {
    pub watch: NodeId,
    pub candidate: NodeId,
    pub probability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WatchlistOptions {
    pub top_k: usize,
    /// Only consider candidates within this many hops of the watchlist node.
    pub max_hops: Option<u32>,
}

impl Default for WatchlistOptions {
    fn default() -> Self {
        WatchlistOptions { top_k: 50, max_hops: None }
    }
}

/// Ranks unlinked `(w, v)` pairs for `w` in the watchlist and `v` outside it.
/// Sorted by probability descending, ties by node ids.
pub fn watchlist_predict(
    model: &LinkModel,
    g: &PropertyGraph,
    watchlist: &[NodeId],
    opts: WatchlistOptions,
) -> Result<Vec<PredictedLink>, LinkPredError> {
    if watchlist.is_empty() {
        return Err(LinkPredError::EmptyWatchlist);
    }
    if let Some(bad) = watchlist.iter().find(|w| !g.contains(**w)) {
        return Err(LinkPredError::UnknownNode(bad.0));
    }
    let watch: BTreeSet<NodeId> = watchlist.iter().copied().collect();
    let emb = model.embed(g)?;
    let mut out = Vec::new();
    for &w in &watch {
        let reach = opts.max_hops.map(|k| g.bfs_distances(w, k)).transpose()?;
        let candidates: Vec<NodeId> = match &reach {
            Some(row) => row.entries.iter().map(|e| e.0).collect(),
            None => (0..g.node_count() as u32).map(NodeId).collect(),
        };
        for v in candidates {
            if watch.contains(&v) || g.has_edge(w, v) {
                continue;
            }
            out.push(PredictedLink { watch: w, candidate: v, probability: score_link(&emb, w, v) });
        }
    }
    out.sort_by(|a, b| {
        b.probability.total_cmp(&a.probability).then(a.watch.cmp(&b.watch)).then(a.candidate.cmp(&b.candidate))
    });
    out.truncate(opts.top_k);
    Ok(out)
}

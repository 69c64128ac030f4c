//! Helpers shared by the link-prediction property tests and the acceptance run.

#![allow(dead_code)]

use mdm::graph::{Edge, Node, NodeId, PropertyGraph, Relation};
use mdm::linkpred::model::{backward, bce_loss, forward, GraphInputs, Trace};
use mdm::linkpred::{AnchorSets, DenseMatrix, ModelKind, ModelParams};
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn random_graph(n: usize, p: f64, seed: u64) -> PropertyGraph {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let nodes = (0..n).map(Node::person).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push(Edge::new(a, b, Relation::Knows));
            }
        }
    }
    PropertyGraph::build(nodes, edges).unwrap()
}

pub fn random_features(n: usize, d: usize, seed: u64) -> DenseMatrix {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    DenseMatrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

pub fn inputs_for(kind: ModelKind, g: &PropertyGraph) -> GraphInputs {
    match kind {
        ModelKind::Gcn => GraphInputs::gcn(g),
        ModelKind::Pgnn => {
            let anchors = AnchorSets::sample(g.node_count(), 12, 4);
            let dcache = anchors.distance_cache(g, 6).unwrap();
            GraphInputs::pgnn(g, &anchors, &dcache).unwrap()
        }
    }
}

/// Smallest distance of any ReLU input from zero.
fn kink_margin(trace: &Trace, layers: usize) -> f64 {
    let pre: Vec<&DenseMatrix> = match trace {
        // The last GCN layer is linear.
        Trace::Gcn { pre, .. } => pre[..layers - 1].iter().collect(),
        Trace::Pgnn { pre, .. } => pre.iter().flatten().collect(),
    };
    pre.iter().flat_map(|p| p.data().iter().map(|v| v.abs())).fold(f64::INFINITY, f64::min)
}

/// Largest per-tensor relative error between analytic and central-difference
/// gradients. Parameters are redrawn until every ReLU input is at least 1e-4
/// away from zero, so the ±1e-5 probes never straddle a kink.
pub fn max_gradient_error(kind: ModelKind, seed: u64) -> f64 {
    let n = 16;
    let g = random_graph(n, 0.25, seed);
    let x = random_features(n, 5, seed + 1);
    let inputs = inputs_for(kind, &g);
    let mut pairs: Vec<(NodeId, NodeId)> = g.edge_pairs();
    let positives = pairs.len();
    for a in 0..n as u32 {
        for b in a + 1..n as u32 {
            if !g.has_edge(NodeId(a), NodeId(b)) && pairs.len() < 2 * positives {
                pairs.push((NodeId(a), NodeId(b)));
            }
        }
    }
    let labels: Vec<bool> = (0..pairs.len()).map(|i| i < positives).collect();
    let mut attempt = 0;
    let params = loop {
        let mut params = ModelParams::init(kind, 5, 6, 2, seed * 1000 + attempt);
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed * 1000 + attempt);
        for (name, t) in params.names.iter().zip(params.tensors.iter_mut()) {
            if name.starts_with('b') {
                t.data_mut().iter_mut().for_each(|v| *v = rng.gen_range(-0.5..0.5));
            }
        }
        let (_, trace) = forward(&params, &inputs, &x).unwrap();
        if kink_margin(&trace, 2) >= 1e-4 {
            break params;
        }
        attempt += 1;
    };
    let loss_of = |p: &ModelParams| bce_loss(&forward(p, &inputs, &x).unwrap().0, &pairs, &labels).0;
    let (z, trace) = forward(&params, &inputs, &x).unwrap();
    let (_, dz) = bce_loss(&z, &pairs, &labels);
    let grads = backward(&params, &inputs, &trace, &dz);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for t in 0..params.tensors.len() {
        let mut numeric = Vec::new();
        for i in 0..params.tensors[t].data().len() {
            let mut plus = params.clone();
            plus.tensors[t].data_mut()[i] += eps;
            let mut minus = params.clone();
            minus.tensors[t].data_mut()[i] -= eps;
            numeric.push((loss_of(&plus) - loss_of(&minus)) / (2.0 * eps));
        }
        let analytic = grads.tensors[t].data();
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nn: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = if na.max(nn) < 1e-10 { 0.0 } else { diff / na.max(nn) };
        worst = worst.max(rel);
    }
    worst
}

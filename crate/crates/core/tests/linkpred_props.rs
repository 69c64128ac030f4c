mod common;

use common::{max_gradient_error, random_features, random_graph};
use mdm::graph::{Edge, Node, NodeId, PropertyGraph, Relation};
use mdm::linkpred::{gcn_forward, pgnn_forward, AnchorSets, DenseMatrix, ModelKind, ModelParams};
use proptest::prelude::*;

#[test]
fn gradients_match_finite_differences() {
    for kind in [ModelKind::Gcn, ModelKind::Pgnn] {
        for seed in 0..10 {
            let err = max_gradient_error(kind, seed);
            assert!(err < 1e-4, "{kind:?} seed {seed}: relative error {err}");
        }
    }
}

fn permuted(g: &PropertyGraph, perm: &[usize]) -> PropertyGraph {
    let nodes = (0..g.node_count()).map(Node::person).collect();
    let edges = g.edges().iter().map(|e| Edge::new(perm[e.src.index()], perm[e.dst.index()], e.relation)).collect();
    PropertyGraph::build(nodes, edges).unwrap()
}

fn permute_rows(x: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
    // Row perm[i] of the result is row i of x.
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    x.select_rows(&inv)
}

fn close(a: &DenseMatrix, b: &DenseMatrix) -> bool {
    a.shape() == b.shape() && a.data().iter().zip(b.data()).all(|(x, y)| (x - y).abs() < 1e-9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gcn_is_permutation_equivariant(seed in 0u64..1000, perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let g = random_graph(12, 0.3, seed);
        let x = random_features(12, 4, seed);
        let params = ModelParams::init(ModelKind::Gcn, 4, 5, 2, seed);
        let out = gcn_forward(&params, &g, &x).unwrap();
        let out_p = gcn_forward(&params, &permuted(&g, &perm), &permute_rows(&x, &perm)).unwrap();
        prop_assert!(close(&out_p, &permute_rows(&out, &perm)));
    }

    #[test]
    fn pgnn_invariant_under_consistent_relabeling(seed in 0u64..1000, perm in Just((0..12).collect::<Vec<usize>>()).prop_shuffle()) {
        let g = random_graph(12, 0.3, seed);
        let x = random_features(12, 4, seed);
        let anchors = AnchorSets::sample(12, 8, seed);
        let params = ModelParams::init(ModelKind::Pgnn, 4, 5, 2, seed);
        let out = pgnn_forward(&params, &g, &x, &anchors, &anchors.distance_cache(&g, 6).unwrap()).unwrap();
        let gp = permuted(&g, &perm);
        let relabeled = AnchorSets {
            sets: anchors.sets.iter().map(|s| s.iter().map(|a| NodeId(perm[a.index()] as u32)).collect()).collect(),
            seed: anchors.seed,
        };
        let out_p = pgnn_forward(&params, &gp, &permute_rows(&x, &perm), &relabeled, &relabeled.distance_cache(&gp, 6).unwrap()).unwrap();
        prop_assert!(close(&out_p, &permute_rows(&out, &perm)));
    }
}

#[test]
fn pgnn_symmetric_nodes_share_embeddings() {
    // Star: leaves 1..=4 around hub 0, anchors only at the hub, equal features.
    let nodes = (0..5).map(Node::person).collect();
    let edges = (1..5).map(|i| Edge::new(0usize, i, Relation::Knows)).collect();
    let g = PropertyGraph::build(nodes, edges).unwrap();
    let x = DenseMatrix::from_vec(5, 2, vec![1.0; 10]);
    let anchors = AnchorSets { sets: vec![vec![NodeId(0)], vec![NodeId(0)]], seed: 0 };
    let params = ModelParams::init(ModelKind::Pgnn, 2, 4, 2, 3);
    let out = pgnn_forward(&params, &g, &x, &anchors, &anchors.distance_cache(&g, 6).unwrap()).unwrap();
    for leaf in 2..5 {
        assert_eq!(out.row(1), out.row(leaf));
    }
}

#[test]
fn pgnn_unreachable_anchor_is_bias_only() {
    // Anchor 3 is isolated from nodes 0..3, so their coordinate sees a zero aggregate.
    let nodes = (0..4).map(Node::person).collect();
    let edges = vec![Edge::new(0usize, 1usize, Relation::Knows), Edge::new(1usize, 2usize, Relation::Knows)];
    let g = PropertyGraph::build(nodes, edges).unwrap();
    let x = random_features(4, 3, 1);
    let anchors = AnchorSets { sets: vec![vec![NodeId(3)]], seed: 0 };
    let mut params = ModelParams::init(ModelKind::Pgnn, 3, 4, 1, 2);
    let b = params.names.iter().position(|n| n == "b0").unwrap();
    params.tensors[b] = DenseMatrix::from_vec(1, 4, vec![0.5, -0.2, 0.1, 0.0]);
    let out = pgnn_forward(&params, &g, &x, &anchors, &anchors.distance_cache(&g, 6).unwrap()).unwrap();
    let w_out = params.tensors[params.names.iter().position(|n| n == "w_out").unwrap()].data().to_vec();
    let expect = 0.5 * w_out[0] + 0.1 * w_out[2];
    for v in 0..3 {
        assert!((out.get(v, 0) - expect).abs() < 1e-12);
    }
}

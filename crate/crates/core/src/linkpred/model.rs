//! GCN and P-GNN forward and backward passes.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::matrix::{dot, DenseMatrix, SparseMatrix};
use super::LinkPredError;
use crate::graph::{DistanceCache, NodeId, PropertyGraph};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gcn,
    Pgnn,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Gcn => "gcn",
            ModelKind::Pgnn => "pgnn",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(ModelKind::Gcn),
            "pgnn" | "p-gnn" => Ok(ModelKind::Pgnn),
            other => Err(format!("unknown model kind {other:?}, expected gcn or pgnn")),
        }
    }
}

/// Named parameter tensors. Biases are `1 × k` rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub names: Vec<String>,
    pub tensors: Vec<DenseMatrix>,
}

fn glorot(rows: usize, cols: usize, rng: &mut Rng) -> DenseMatrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    DenseMatrix::from_vec(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect())
}

impl ModelParams {
    /// GCN: `layers` weight/bias pairs, `d_in → hidden → … → hidden`.
    /// P-GNN: the same stack with `2·d` input rows per layer (self and
    /// anchor halves) and a `hidden → 1` output projection shared by all sets.
    pub fn init(kind: ModelKind, d_in: usize, hidden: usize, layers: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, "init");
        let mut names = Vec::new();
        let mut tensors = Vec::new();
        let mut d = d_in;
        for l in 0..layers {
            let fan_in = if kind == ModelKind::Pgnn { 2 * d } else { d };
            names.push(format!("w{l}"));
            tensors.push(glorot(fan_in, hidden, &mut rng));
            names.push(format!("b{l}"));
            tensors.push(DenseMatrix::zeros(1, hidden));
            d = hidden;
        }
        if kind == ModelKind::Pgnn {
            names.push("w_out".into());
            tensors.push(glorot(hidden, 1, &mut rng));
            names.push("b_out".into());
            tensors.push(DenseMatrix::zeros(1, 1));
        }
        ModelParams { names, tensors }
    }

    pub fn layers(&self) -> usize {
        self.names.iter().filter(|n| n.starts_with('w') && n[1..].parse::<usize>().is_ok()).count()
    }

    pub fn get(&self, name: &str) -> &DenseMatrix {
        let i = self.names.iter().position(|n| n == name).unwrap_or_else(|| panic!("no parameter {name}"));
        &self.tensors[i]
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            names: self.names.clone(),
            tensors: self.tensors.iter().map(|t| DenseMatrix::zeros(t.rows(), t.cols())).collect(),
        }
    }

    fn set(&mut self, name: &str, value: DenseMatrix) {
        let i = self.names.iter().position(|n| n == name).unwrap_or_else(|| panic!("no parameter {name}"));
        self.tensors[i] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.tensors.iter().all(DenseMatrix::is_finite)
    }
}

/// `D̃^(-1/2) (A + I) D̃^(-1/2)` over distinct neighbours.
pub fn normalized_adjacency(g: &PropertyGraph) -> SparseMatrix {
    let n = g.node_count();
    let deg: Vec<f64> = (0..n).map(|i| g.degree(NodeId(i as u32)) as f64 + 1.0).collect();
    let rows = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = g
                .neighbors(NodeId(i as u32))
                .iter()
                .map(|v| (v.index(), 1.0 / (deg[i] * deg[v.index()]).sqrt()))
                .collect();
            row.push((i, 1.0 / deg[i]));
            row.sort_by_key(|e| e.0);
            row
        })
        .collect();
    SparseMatrix::from_rows(n, rows)
}

/// Random anchor sets with sizes `1, 1, 2, 2, 4, 4, …` until the anchor
/// budget is spent; the last set takes whatever remains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSets {
    pub sets: Vec<Vec<NodeId>>,
    pub seed: u64,
}

impl AnchorSets {
    pub fn set_sizes(total: usize) -> Vec<usize> {
        let mut sizes = Vec::new();
        let mut left = total;
        let mut size = 1;
        while left > 0 {
            for _ in 0..2 {
                if left == 0 {
                    break;
                }
                let s = size.min(left);
                sizes.push(s);
                left -= s;
            }
            size *= 2;
        }
        sizes
    }

    /// Draws each set without replacement from `0..n`. Sets may overlap.
    pub fn sample(n: usize, total: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, "anchors");
        let sets = Self::set_sizes(total)
            .into_iter()
            .map(|s| {
                let mut set: Vec<NodeId> =
                    sample(&mut rng, n, s.min(n)).into_iter().map(|i| NodeId(i as u32)).collect();
                set.sort();
                set
            })
            .collect();
        AnchorSets { sets, seed }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Every distinct anchor, ascending.
    pub fn anchors(&self) -> Vec<NodeId> {
        let mut all: Vec<NodeId> = self.sets.iter().flatten().copied().collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn distance_cache(&self, g: &PropertyGraph, cutoff: u32) -> Result<DistanceCache, LinkPredError> {
        Ok(DistanceCache::build(g, &self.anchors(), cutoff)?)
    }
}

/// Per anchor set: `P[v, u] = s(v, u) / |S|` for anchors `u` in the set, with
/// `s = 1 / (d + 1)` inside the cutoff and zero beyond it, and `c[v] = Σ_u P[v, u]`.
#[derive(Debug, Clone)]
pub struct SetWeights {
    pub p: SparseMatrix,
    pub c: Vec<f64>,
}

pub fn anchor_weights(n: usize, anchors: &AnchorSets, dcache: &DistanceCache) -> Result<Vec<SetWeights>, LinkPredError> {
    anchors
        .sets
        .iter()
        .map(|set| {
            let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
            let scale = 1.0 / set.len().max(1) as f64;
            for &u in set {
                if u.index() >= n {
                    return Err(LinkPredError::ShapeMismatch(format!("anchor {} outside a {n}-node graph", u.0)));
                }
                let row = dcache
                    .row(u)
                    .ok_or_else(|| LinkPredError::ShapeMismatch(format!("distance cache lacks anchor {}", u.0)))?;
                for &(v, d) in &row.entries {
                    if d <= dcache.cutoff {
                        rows[v.index()].push((u.index(), scale / (f64::from(d) + 1.0)));
                    }
                }
            }
            for r in &mut rows {
                r.sort_by_key(|e| e.0);
            }
            let c = rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
            Ok(SetWeights { p: SparseMatrix::from_rows(n, rows), c })
        })
        .collect()
}

/// Graph-dependent constants a model needs for a forward pass.
#[derive(Debug, Clone)]
pub enum GraphInputs {
    Gcn { adj: SparseMatrix },
    Pgnn { sets: Vec<SetWeights> },
}

impl GraphInputs {
    pub fn gcn(g: &PropertyGraph) -> Self {
        GraphInputs::Gcn { adj: normalized_adjacency(g) }
    }

    pub fn pgnn(g: &PropertyGraph, anchors: &AnchorSets, dcache: &DistanceCache) -> Result<Self, LinkPredError> {
        Ok(GraphInputs::Pgnn { sets: anchor_weights(g.node_count(), anchors, dcache)? })
    }

    fn nodes(&self) -> usize {
        match self {
            GraphInputs::Gcn { adj } => adj.rows(),
            GraphInputs::Pgnn { sets } => sets.first().map_or(0, |s| s.c.len()),
        }
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub enum Trace {
    /// Per layer: aggregated input `Â·H` and pre-activation.
    Gcn { agg: Vec<DenseMatrix>, pre: Vec<DenseMatrix> },
    /// Per layer: layer input and one pre-activation per anchor set.
    Pgnn { input: Vec<DenseMatrix>, pre: Vec<Vec<DenseMatrix>> },
}

fn check_shapes(params: &ModelParams, x: &DenseMatrix, inputs: &GraphInputs) -> Result<(), LinkPredError> {
    if x.rows() != inputs.nodes() {
        return Err(LinkPredError::ShapeMismatch(format!(
            "feature rows {} but graph has {} nodes",
            x.rows(),
            inputs.nodes()
        )));
    }
    let mut d = x.cols();
    for l in 0..params.layers() {
        let w = params.get(&format!("w{l}"));
        let expect = match inputs {
            GraphInputs::Gcn { .. } => d,
            GraphInputs::Pgnn { .. } => 2 * d,
        };
        if w.rows() != expect || params.get(&format!("b{l}")).shape() != (1, w.cols()) {
            return Err(LinkPredError::ShapeMismatch(format!("layer {l} expects {expect} inputs, weight is {:?}", w.shape())));
        }
        d = w.cols();
    }
    if let GraphInputs::Pgnn { sets } = inputs {
        if sets.is_empty() {
            return Err(LinkPredError::ShapeMismatch("no anchor sets".into()));
        }
        if params.get("w_out").shape() != (d, 1) {
            return Err(LinkPredError::ShapeMismatch("output projection does not match hidden size".into()));
        }
    }
    Ok(())
}

fn finite(m: &DenseMatrix, layer: usize) -> Result<(), LinkPredError> {
    if m.is_finite() {
        Ok(())
    } else {
        Err(LinkPredError::NonFiniteActivation { layer })
    }
}

/// Runs the model and returns embeddings plus the trace for `backward`.
pub fn forward(params: &ModelParams, inputs: &GraphInputs, x: &DenseMatrix) -> Result<(DenseMatrix, Trace), LinkPredError> {
    finite(x, 0)?;
    check_shapes(params, x, inputs)?;
    let layers = params.layers();
    match inputs {
        GraphInputs::Gcn { adj } => {
            let mut h = x.clone();
            let (mut aggs, mut pres) = (Vec::new(), Vec::new());
            for l in 0..layers {
                let agg = adj.matmul(&h);
                let mut pre = agg.matmul(params.get(&format!("w{l}")));
                pre.add_row(params.get(&format!("b{l}")));
                finite(&pre, l)?;
                h = if l + 1 < layers { pre.relu() } else { pre.clone() };
                aggs.push(agg);
                pres.push(pre);
            }
            Ok((h, Trace::Gcn { agg: aggs, pre: pres }))
        }
        GraphInputs::Pgnn { sets } => {
            let mut h = x.clone();
            let (mut ins, mut pres) = (Vec::new(), Vec::new());
            let mut out = DenseMatrix::zeros(x.rows(), sets.len());
            for l in 0..layers {
                let w = params.get(&format!("w{l}"));
                let d = h.cols();
                let self_part = h.matmul(&w.row_block(0, d));
                let anchor_part = h.matmul(&w.row_block(d, 2 * d));
                let b = params.get(&format!("b{l}"));
                let mut layer_pre = Vec::with_capacity(sets.len());
                let mut next = DenseMatrix::zeros(h.rows(), w.cols());
                for (i, s) in sets.iter().enumerate() {
                    let mut pre = self_part.scale_rows(&s.c);
                    pre.add_assign(&s.p.matmul(&anchor_part));
                    pre.add_row(b);
                    finite(&pre, l)?;
                    let m = pre.relu();
                    if l + 1 < layers {
                        next.axpy(1.0 / sets.len() as f64, &m);
                    } else {
                        let z = m.matmul(params.get("w_out"));
                        let bias = params.get("b_out").get(0, 0);
                        for v in 0..z.rows() {
                            out.set(v, i, z.get(v, 0) + bias);
                        }
                    }
                    layer_pre.push(pre);
                }
                ins.push(h);
                pres.push(layer_pre);
                h = next;
            }
            finite(&out, layers)?;
            Ok((out, Trace::Pgnn { input: ins, pre: pres }))
        }
    }
}

/// Gradients of all parameters given `dz = ∂loss/∂embeddings`.
pub fn backward(params: &ModelParams, inputs: &GraphInputs, trace: &Trace, dz: &DenseMatrix) -> ModelParams {
    let mut grads = params.zeros_like();
    let layers = params.layers();
    match (inputs, trace) {
        (GraphInputs::Gcn { adj }, Trace::Gcn { agg, pre }) => {
            let mut dpre = dz.clone();
            for l in (0..layers).rev() {
                grads.set(&format!("w{l}"), agg[l].t_matmul(&dpre));
                grads.set(&format!("b{l}"), dpre.col_sums());
                if l > 0 {
                    let dagg = dpre.matmul_t(params.get(&format!("w{l}")));
                    let mut dh = adj.t_matmul(&dagg);
                    dh.mask_positive(&pre[l - 1]);
                    dpre = dh;
                }
            }
        }
        (GraphInputs::Pgnn { sets }, Trace::Pgnn { input, pre }) => {
            let k = sets.len();
            let w_out = params.get("w_out");
            let hidden = w_out.rows();
            let mut dw_out = DenseMatrix::zeros(hidden, 1);
            let mut db_out = 0.0;
            // ∂loss/∂M_i for the current layer.
            let mut dm: Vec<DenseMatrix> = (0..k)
                .map(|i| {
                    let col: Vec<f64> = (0..dz.rows()).map(|v| dz.get(v, i)).collect();
                    let colm = DenseMatrix::from_vec(dz.rows(), 1, col.clone());
                    let m = pre[layers - 1][i].relu();
                    dw_out.add_assign(&m.t_matmul(&colm));
                    db_out += col.iter().sum::<f64>();
                    colm.matmul_t(w_out)
                })
                .collect();
            grads.set("w_out", dw_out);
            grads.set("b_out", DenseMatrix::from_vec(1, 1, vec![db_out]));
            for l in (0..layers).rev() {
                let h = &input[l];
                let w = params.get(&format!("w{l}"));
                let d = h.cols();
                let mut g_self = DenseMatrix::zeros(h.rows(), w.cols());
                let mut g_anchor = DenseMatrix::zeros(h.rows(), w.cols());
                let mut db = DenseMatrix::zeros(1, w.cols());
                for (i, s) in sets.iter().enumerate() {
                    let mut dp = dm[i].clone();
                    dp.mask_positive(&pre[l][i]);
                    db.add_assign(&dp.col_sums());
                    g_self.add_assign(&dp.scale_rows(&s.c));
                    g_anchor.add_assign(&s.p.t_matmul(&dp));
                }
                grads.set(&format!("w{l}"), DenseMatrix::vstack(&h.t_matmul(&g_self), &h.t_matmul(&g_anchor)));
                grads.set(&format!("b{l}"), db);
                if l > 0 {
                    let mut dh = g_self.matmul_t(&w.row_block(0, d));
                    dh.add_assign(&g_anchor.matmul_t(&w.row_block(d, 2 * d)));
                    dh.scale(1.0 / k as f64);
                    dm = vec![dh; k];
                }
            }
        }
        _ => panic!("trace does not match graph inputs"),
    }
    grads
}

/// GCN embeddings: `H ← ReLU(Â H W + b)` per layer, last layer linear.
pub fn gcn_forward(params: &ModelParams, g: &PropertyGraph, x: &DenseMatrix) -> Result<DenseMatrix, LinkPredError> {
    Ok(forward(params, &GraphInputs::gcn(g), x)?.0)
}

/// P-GNN embeddings with one coordinate per anchor set.
pub fn pgnn_forward(
    params: &ModelParams,
    g: &PropertyGraph,
    x: &DenseMatrix,
    anchors: &AnchorSets,
    dcache: &DistanceCache,
) -> Result<DenseMatrix, LinkPredError> {
    Ok(forward(params, &GraphInputs::pgnn(g, anchors, dcache)?, x)?.0)
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(⟨z_u, z_v⟩)`.
pub fn score_link(emb: &DenseMatrix, u: NodeId, v: NodeId) -> f64 {
    sigmoid(dot(emb.row(u.index()), emb.row(v.index())))
}

/// Mean binary cross-entropy with logits over `pairs`, and its gradient
/// with respect to the embeddings.
pub fn bce_loss(emb: &DenseMatrix, pairs: &[(NodeId, NodeId)], labels: &[bool]) -> (f64, DenseMatrix) {
    let mut grad = DenseMatrix::zeros(emb.rows(), emb.cols());
    if pairs.is_empty() {
        return (0.0, grad);
    }
    let scale = 1.0 / pairs.len() as f64;
    let mut loss = 0.0;
    for (&(u, v), &y) in pairs.iter().zip(labels) {
        let (ui, vi) = (u.index(), v.index());
        let logit = dot(emb.row(ui), emb.row(vi));
        let t = if y { 1.0 } else { 0.0 };
        // softplus(x) - t·x, written to stay finite for large |x|.
        loss += logit.max(0.0) - t * logit + (-logit.abs()).exp().ln_1p();
        let g = (sigmoid(logit) - t) * scale;
        let zu = emb.row(ui).to_vec();
        let zv = emb.row(vi).to_vec();
        for (o, x) in grad.row_mut(ui).iter_mut().zip(&zv) {
            *o += g * x;
        }
        for (o, x) in grad.row_mut(vi).iter_mut().zip(&zu) {
            *o += g * x;
        }
    }
    (loss * scale, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node, Relation};

    #[test]
    fn anchor_budget() {
        let sizes = AnchorSets::set_sizes(64);
        assert_eq!(sizes, vec![1, 1, 2, 2, 4, 4, 8, 8, 16, 16, 2]);
        assert_eq!(sizes.iter().sum::<usize>(), 64);
        let a = AnchorSets::sample(100, 64, 3);
        assert_eq!(a.len(), 11);
        assert!(a.anchors().iter().all(|n| n.index() < 100));
        assert_eq!(a, AnchorSets::sample(100, 64, 3));
    }

    #[test]
    fn single_node_gcn_is_mlp() {
        let g = PropertyGraph::build(vec![Node::person(0usize)], vec![]).unwrap();
        let params = ModelParams::init(ModelKind::Gcn, 3, 4, 2, 1);
        let x = DenseMatrix::from_rows(&[vec![0.5, -1.0, 2.0]]);
        let out = gcn_forward(&params, &g, &x).unwrap();
        let mut h = x.matmul(params.get("w0"));
        h.add_row(params.get("b0"));
        let mut expect = h.relu().matmul(params.get("w1"));
        expect.add_row(params.get("b1"));
        assert_eq!(out, expect);
    }

    #[test]
    fn zero_weights_zero_embeddings() {
        let g = PropertyGraph::build(
            (0..3).map(Node::person).collect(),
            vec![Edge::new(0usize, 1usize, Relation::Knows)],
        )
        .unwrap();
        let params = ModelParams::init(ModelKind::Gcn, 2, 4, 2, 1).zeros_like();
        let x = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert!(gcn_forward(&params, &g, &x).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sigmoid_closed_form() {
        let emb = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![3f64.ln(), 0.0]]);
        assert_eq!(score_link(&emb, NodeId(0), NodeId(1)), 0.5);
        assert!((score_link(&emb, NodeId(0), NodeId(2)) - 0.75).abs() < 1e-12);
        assert_eq!(score_link(&emb, NodeId(2), NodeId(0)), score_link(&emb, NodeId(0), NodeId(2)));
    }

    #[test]
    fn shape_mismatch_reported() {
        let g = PropertyGraph::build(vec![Node::person(0usize)], vec![]).unwrap();
        let params = ModelParams::init(ModelKind::Gcn, 3, 4, 2, 1);
        let x = DenseMatrix::zeros(1, 5);
        assert!(matches!(gcn_forward(&params, &g, &x), Err(LinkPredError::ShapeMismatch(_))));
    }
}

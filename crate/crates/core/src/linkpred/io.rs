//! Model file: `MDMM`, a little-endian `u32` format version, a `u64` header
//! length, the JSON header, then every parameter tensor as little-endian
//! `f64` values in header order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureEncoder;
use super::matrix::DenseMatrix;
use super::model::{AnchorSets, ModelKind, ModelParams};
use super::train::LinkModel;
use super::{LinkPredError, TrainConfig};

const MAGIC: &[u8; 4] = b"MDMM";
pub const FORMAT_VERSION: u32 = 1;
pub const MODEL_FILE: &str = "model.bin";

#[derive(Serialize, Deserialize)]
struct Header {
    kind: ModelKind,
    config: TrainConfig,
    seed: u64,
    encoder: FeatureEncoder,
    anchors: Option<AnchorSets>,
    tensors: Vec<(String, usize, usize)>,
    losses: Vec<f64>,
}

pub fn to_bytes(model: &LinkModel) -> Vec<u8> {
    let header = Header {
        kind: model.kind,
        config: model.config.clone(),
        seed: model.seed,
        encoder: model.encoder.clone(),
        anchors: model.anchors.clone(),
        tensors: model.params.names.iter().zip(&model.params.tensors).map(|(n, t)| (n.clone(), t.rows(), t.cols())).collect(),
        losses: model.losses.clone(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for t in &model.params.tensors {
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn from_bytes(bytes: &[u8]) -> Result<LinkModel, LinkPredError> {
    let bad = |m: &str| LinkPredError::Format(m.to_string());
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(bad("not a model file"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    if version != FORMAT_VERSION {
        return Err(LinkPredError::Format(format!("unsupported format version {version}")));
    }
    let len = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes")) as usize;
    let body = bytes.get(16..16 + len).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(body).map_err(|e| LinkPredError::Format(e.to_string()))?;
    let mut blob = &bytes[16 + len..];
    let mut params = ModelParams { names: Vec::new(), tensors: Vec::new() };
    for (name, rows, cols) in header.tensors {
        let need = rows * cols * 8;
        if blob.len() < need {
            return Err(bad("truncated tensor data"));
        }
        let data = blob[..need].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        blob = &blob[need..];
        params.names.push(name);
        params.tensors.push(DenseMatrix::from_vec(rows, cols, data));
    }
    if !blob.is_empty() {
        return Err(bad("trailing bytes after tensors"));
    }
    Ok(LinkModel {
        kind: header.kind,
        config: header.config,
        seed: header.seed,
        encoder: header.encoder,
        params,
        anchors: header.anchors,
        losses: header.losses,
    })
}

pub fn save(model: &LinkModel, dir: &Path) -> Result<(), LinkPredError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(MODEL_FILE), to_bytes(model))?;
    Ok(())
}

pub fn load(dir: &Path) -> Result<LinkModel, LinkPredError> {
    from_bytes(&fs::read(dir.join(MODEL_FILE))?)
}

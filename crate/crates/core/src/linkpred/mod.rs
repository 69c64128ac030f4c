//! Link prediction with graph convolutional and position-aware graph networks.
//!
//! The pipeline is: filter the graph to components of at least ten nodes,
//! hold out a fraction of links as positives, sample as many negatives, train
//! on the remaining graph and score the held-out pairs.

pub mod features;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod model;
pub mod split;
pub mod train;
pub mod watchlist;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphError;

pub use features::{EncoderSpec, FeatureEncoder, Recipe};
pub use matrix::{DenseMatrix, SparseMatrix};
pub use metrics::{mdm_metrics, roc_auc, MdmMetrics, MetricsReport, RunMetrics, Summary};
pub use model::{gcn_forward, pgnn_forward, score_link, AnchorSets, ModelKind, ModelParams};
pub use split::{sample_negatives, split_links, LinkSplit};
pub use train::{train, LinkModel, TrainOutcome};
pub use watchlist::{watchlist_predict, PredictedLink, WatchlistOptions};

#[derive(Debug, Error)]
pub enum LinkPredError {
    #[error("graph has {edges} links, at least 10 are required")]
    TooFewEdges { edges: usize },
    #[error("fraction {0} must lie strictly between 0 and 1")]
    InvalidFraction(f64),
    #[error("no unconnected partner left for node {node}")]
    ExhaustedCandidates { node: u32 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite activation in layer {layer}")]
    NonFiniteActivation { layer: usize },
    #[error("loss diverged at epoch {epoch}")]
    Divergence { epoch: usize },
    #[error("both classes must be present")]
    SingleClass,
    #[error("watchlist is empty")]
    EmptyWatchlist,
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub positive_fraction: f64,
    pub negative_ratio: f64,
    pub batch_subgraphs: usize,
    pub anchors: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub distance_cutoff: u32,
    pub hidden: usize,
    pub layers: usize,
    /// Independent runs with seeds `seed, seed + 1, ...`; metrics are averaged.
    pub runs: usize,
    pub features: EncoderSpec,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            positive_fraction: 0.10,
            negative_ratio: 1.0,
            batch_subgraphs: 8,
            anchors: 64,
            epochs: 200,
            learning_rate: 0.01,
            seed: 42,
            distance_cutoff: 6,
            hidden: 32,
            layers: 2,
            runs: 3,
            features: EncoderSpec::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LinkPredError> {
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return Err(LinkPredError::InvalidFraction(self.positive_fraction));
        }
        if !(self.negative_ratio > 0.0 && self.negative_ratio.is_finite()) {
            return Err(LinkPredError::Config(format!("negative_ratio {} must be positive", self.negative_ratio)));
        }
        let checks = [
            (self.batch_subgraphs, "batch_subgraphs"),
            (self.anchors, "anchors"),
            (self.hidden, "hidden"),
            (self.layers, "layers"),
            (self.runs, "runs"),
        ];
        if let Some((_, name)) = checks.iter().find(|(v, _)| *v == 0) {
            return Err(LinkPredError::Config(format!("{name} must be at least 1")));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(LinkPredError::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self, LinkPredError> {
        let cfg: TrainConfig = toml::from_str(text).map_err(|e| LinkPredError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

//! GraphSheets: a per-run transparency document with graph facts, the full
//! training configuration, metrics and a templated FAQ.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::anonymize::civil_from_days;
use crate::datagen::average_path_length;
use crate::graph::{NodeKind, PropertyGraph};
use crate::linkpred::{MetricsReport, ModelKind, Summary, TrainConfig};

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");
/// BFS sources used for the sampled average path length.
pub const PATH_LENGTH_SOURCES: usize = 100;

pub const SECTIONS: [&str; 6] = [
    "Purpose & Intended Use",
    "Graph Facts",
    "Diversity & Protected Attributes",
    "Model & Training Config",
    "Metrics",
    "Caveats/FAQ",
];

#[derive(Debug, Error)]
pub enum GraphSheetError {
    #[error("run record is incomplete: {0}")]
    IncompleteRecord(String),
    #[error("invalid run record JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SheetFormat {
    Markdown,
    Json,
}

impl std::str::FromStr for SheetFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(SheetFormat::Markdown),
            "json" => Ok(SheetFormat::Json),
            other => Err(format!("unknown graphsheet format {other:?}")),
        }
    }
}

/// The headline counts: persons, links, attribute kinds and relation types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub persons: usize,
    pub links: usize,
    pub attributes: usize,
    pub relations: usize,
}

/// Everything known about one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub dataset_id: String,
    pub dataset_hash: String,
    pub stats: GraphStats,
    pub node_count: usize,
    pub edge_count: usize,
    pub attribute_counts: BTreeMap<String, usize>,
    pub relation_counts: BTreeMap<String, usize>,
    pub protected_attributes: BTreeMap<String, BTreeMap<String, usize>>,
    /// Component size to number of components of that size.
    pub component_sizes: BTreeMap<usize, usize>,
    pub avg_path_length: f64,
    pub path_length_sources: usize,
    pub model: ModelKind,
    pub train_config: TrainConfig,
    pub seeds: Vec<u64>,
    pub metrics: MetricsReport,
    pub anonymized: bool,
    pub started_at: String,
    pub finished_at: String,
    pub toolkit_version: String,
}

/// Run context that does not live in the graph or the config.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInfo {
    pub dataset_id: String,
    pub model: ModelKind,
    pub protected_attributes: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
}

impl RunInfo {
    pub fn new(dataset_id: &str, model: ModelKind) -> Self {
        let now = utc_timestamp(SystemTime::now());
        RunInfo {
            dataset_id: dataset_id.to_string(),
            model,
            protected_attributes: vec!["gender".into(), "ethnicity".into()],
            started_at: now.clone(),
            finished_at: now,
        }
    }
}

/// RFC 3339 UTC timestamp with second precision.
pub fn utc_timestamp(t: SystemTime) -> String {
    let secs = t.duration_since(UNIX_EPOCH).map(|d| d.as_secs() as i64).unwrap_or(0);
    let (y, m, d) = civil_from_days(secs.div_euclid(86_400));
    let s = secs.rem_euclid(86_400);
    format!("{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z", s / 3600, s / 60 % 60, s % 60)
}

/// SHA-256 over the JSON of the node and edge lists.
pub fn graph_hash(g: &PropertyGraph) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(g.nodes()).expect("nodes serialize"));
    h.update(serde_json::to_vec(g.edges()).expect("edges serialize"));
    format!("{:x}", h.finalize())
}

pub fn collect_facts(
    g: &PropertyGraph,
    info: &RunInfo,
    config: &TrainConfig,
    metrics: &MetricsReport,
    anonymized: bool,
) -> RunRecord {
    let mut attribute_counts: BTreeMap<String, usize> = BTreeMap::new();
    for n in g.nodes() {
        for k in n.attributes.keys() {
            *attribute_counts.entry(k.clone()).or_default() += 1;
        }
    }
    let mut relation_counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in g.edges() {
        *relation_counts.entry(e.relation.as_str().to_string()).or_default() += 1;
    }
    let protected_attributes = info
        .protected_attributes
        .iter()
        .map(|a| {
            let mut hist: BTreeMap<String, usize> = BTreeMap::new();
            for n in g.nodes() {
                *hist.entry(n.attr(a).unwrap_or("(missing)").to_string()).or_default() += 1;
            }
            (a.clone(), hist)
        })
        .collect();
    let mut component_sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for c in g.connected_components() {
        *component_sizes.entry(c.len()).or_default() += 1;
    }
    let pairs: Vec<(usize, usize)> = g.edge_pairs().into_iter().map(|(a, b)| (a.index(), b.index())).collect();
    let giant = component_sizes.keys().next_back().copied().unwrap_or(0);
    RunRecord {
        dataset_id: info.dataset_id.clone(),
        dataset_hash: graph_hash(g),
        stats: GraphStats {
            persons: g.nodes().iter().filter(|n| n.kind == NodeKind::Person).count(),
            links: g.edge_count(),
            attributes: attribute_counts.len(),
            relations: relation_counts.len(),
        },
        node_count: g.node_count(),
        edge_count: g.edge_count(),
        attribute_counts,
        relation_counts,
        protected_attributes,
        component_sizes,
        avg_path_length: average_path_length(g.node_count(), &pairs, PATH_LENGTH_SOURCES),
        path_length_sources: giant.min(PATH_LENGTH_SOURCES),
        model: info.model,
        train_config: config.clone(),
        seeds: (0..config.runs as u64).map(|r| config.seed.wrapping_add(r)).collect(),
        metrics: metrics.clone(),
        anonymized,
        started_at: info.started_at.clone(),
        finished_at: info.finished_at.clone(),
        toolkit_version: TOOLKIT_VERSION.to_string(),
    }
}

impl RunRecord {
    pub fn validate(&self) -> Result<(), GraphSheetError> {
        let missing = |f: &str| Err(GraphSheetError::IncompleteRecord(format!("{f} is missing")));
        for (name, value) in [
            ("dataset_id", &self.dataset_id),
            ("dataset_hash", &self.dataset_hash),
            ("started_at", &self.started_at),
            ("finished_at", &self.finished_at),
            ("toolkit_version", &self.toolkit_version),
        ] {
            if value.trim().is_empty() {
                return missing(name);
            }
        }
        if self.metrics.runs.is_empty() {
            return missing("metrics.runs");
        }
        if self.seeds.len() != self.train_config.runs || self.metrics.runs.len() != self.train_config.runs {
            return Err(GraphSheetError::IncompleteRecord(format!(
                "{} runs configured but {} seeds and {} run results recorded",
                self.train_config.runs,
                self.seeds.len(),
                self.metrics.runs.len()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Parses a record, requiring every training config field to be spelled
    /// out rather than filled from defaults.
    pub fn from_json(s: &str) -> Result<Self, GraphSheetError> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        let expected = serde_json::to_value(TrainConfig::default())?;
        let given = value.get("train_config").and_then(|c| c.as_object());
        for key in expected.as_object().expect("config is an object").keys() {
            if !given.is_some_and(|c| c.contains_key(key)) {
                return Err(GraphSheetError::IncompleteRecord(format!("train_config.{key} is missing")));
            }
        }
        Ok(serde_json::from_value(value)?)
    }
}

fn summary(s: &Summary) -> String {
    format!("{} ± {}", s.mean, s.std_dev)
}

pub fn render_graphsheet(record: &RunRecord, format: SheetFormat) -> Result<String, GraphSheetError> {
    record.validate()?;
    Ok(match format {
        SheetFormat::Json => record.to_json(),
        SheetFormat::Markdown => render_markdown(record),
    })
}

fn render_markdown(r: &RunRecord) -> String {
    let c = &r.train_config;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "# GraphSheet: {} on {}\n", r.model.as_str(), r.dataset_id);

    let _ = writeln!(w, "## {}\n", SECTIONS[0]);
    let _ = writeln!(
        w,
        "Link prediction between person entities for watchlist review. Predicted links are leads for a data \
         steward, not facts: every prediction is meant to be checked against the explanation bundle before it is \
         accepted. Not intended for automated decisions about individuals.\n"
    );

    let _ = writeln!(w, "## {}\n", SECTIONS[1]);
    let _ = writeln!(w, "| Fact | Value |\n|---|---|");
    let _ = writeln!(w, "| Dataset | {} |", r.dataset_id);
    let _ = writeln!(w, "| Dataset hash (SHA-256) | `{}` |", r.dataset_hash);
    let _ = writeln!(w, "| Persons | {} |", r.stats.persons);
    let _ = writeln!(w, "| Links | {} |", r.stats.links);
    let _ = writeln!(w, "| Attributes | {} |", r.stats.attributes);
    let _ = writeln!(w, "| Relations | {} |", r.stats.relations);
    let _ = writeln!(w, "| Nodes | {} |", r.node_count);
    let _ = writeln!(w, "| Edges | {} |", r.edge_count);
    let _ = writeln!(w, "| Average path length (BFS from {} sources) | {} |", r.path_length_sources, r.avg_path_length);
    let _ = writeln!(w, "\nRelation types:\n\n| Relation | Edges |\n|---|---|");
    for (k, v) in &r.relation_counts {
        let _ = writeln!(w, "| {k} | {v} |");
    }
    let _ = writeln!(w, "\nAttribute coverage:\n\n| Attribute | Nodes |\n|---|---|");
    for (k, v) in &r.attribute_counts {
        let _ = writeln!(w, "| {k} | {v} |");
    }
    let _ = writeln!(w, "\nComponent sizes:\n\n| Size | Components |\n|---|---|");
    for (k, v) in &r.component_sizes {
        let _ = writeln!(w, "| {k} | {v} |");
    }
    let _ = writeln!(w);

    let _ = writeln!(w, "## {}\n", SECTIONS[2]);
    if r.protected_attributes.is_empty() {
        let _ = writeln!(w, "No protected attributes declared.\n");
    }
    for (attr, hist) in &r.protected_attributes {
        let _ = writeln!(w, "{attr}:\n\n| Value | Nodes |\n|---|---|");
        for (k, v) in hist {
            let _ = writeln!(w, "| {k} | {v} |");
        }
        let _ = writeln!(w);
    }

    let _ = writeln!(w, "## {}\n", SECTIONS[3]);
    let _ = writeln!(w, "| Field | Value |\n|---|---|");
    let _ = writeln!(w, "| model | {} |", r.model.as_str());
    let config = serde_json::to_value(c).expect("config serializes");
    for (k, v) in config.as_object().expect("config is an object") {
        let _ = writeln!(w, "| {k} | `{v}` |");
    }
    let seeds: Vec<String> = r.seeds.iter().map(u64::to_string).collect();
    let _ = writeln!(w, "| seeds | {} |", seeds.join(", "));
    let _ = writeln!(w, "| toolkit version | {} |", r.toolkit_version);
    let _ = writeln!(w, "| started | {} |", r.started_at);
    let _ = writeln!(w, "| finished | {} |\n", r.finished_at);

    let _ = writeln!(w, "## {}\n", SECTIONS[4]);
    let m = &r.metrics;
    let _ = writeln!(w, "Mean ± sample standard deviation over {} runs.\n", m.runs.len());
    let _ = writeln!(w, "| Metric | Value |\n|---|---|");
    let _ = writeln!(w, "| ROC AUC | {} |", summary(&m.roc_auc));
    let _ = writeln!(w, "| Accuracy | {} |", summary(&m.accuracy));
    let _ = writeln!(w, "| Positive sample accuracy | {} |", summary(&m.positive_sample_accuracy));
    let _ = writeln!(w, "| Positive predictions on negatives | {} |", summary(&m.positive_predictions_on_negatives));
    let _ = writeln!(w, "\n| Seed | ROC AUC | Accuracy | Pos. acc. | Pos. on neg. | Final loss |\n|---|---|---|---|---|---|");
    for run in &m.runs {
        let _ = writeln!(
            w,
            "| {} | {} | {} | {} | {} | {} |",
            run.seed,
            run.roc_auc,
            run.accuracy,
            run.positive_sample_accuracy,
            run.positive_predictions_on_negatives,
            run.final_loss
        );
    }
    let _ = writeln!(w);

    let _ = writeln!(w, "## {}\n", SECTIONS[5]);
    let _ = writeln!(
        w,
        "**Where does the data come from?** Dataset `{}` with content hash `{}`. Persons are resolved entities; \
         links are stated relationships lifted from source records.\n",
        r.dataset_id, r.dataset_hash
    );
    let _ = writeln!(
        w,
        "**Was the data anonymized?** {}\n",
        if r.anonymized {
            "Yes. Classed identifying attributes were replaced by consistent pseudonyms and dates shifted per entity before training."
        } else {
            "No. The model was trained on identifying attribute values; restrict access to the model and this sheet accordingly."
        }
    );
    let _ = writeln!(
        w,
        "**How were negatives sampled?** {} of linked pairs were held out as positives. Each held-out positive \
         gets {} negative(s): one of its endpoints paired with a node it is not linked to. Training negatives are \
         redrawn every epoch the same way.\n",
        c.positive_fraction, c.negative_ratio
    );
    let _ = writeln!(
        w,
        "**What do the thresholds mean?** A link probability of at least 0.5 counts as a predicted link. Positive \
         sample accuracy is the share of held-out links predicted; positive predictions on negatives is the share \
         of negatives wrongly predicted as links. Both must be read together.\n"
    );
    let _ = writeln!(
        w,
        "**Can predictions depend on protected attributes?** Feature recipe: {}. Review the diversity section \
         before deploying on another population.",
        if c.features.fields.is_empty() {
            "structure only (normalized degree)".to_string()
        } else {
            c.features.fields.iter().map(|(a, _)| a.as_str()).collect::<Vec<_>>().join(", ")
        }
    );
    out
}

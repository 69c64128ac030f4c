//! File-level steps that chain the modules together: the work behind each
//! `mdm` subcommand, reusable from code.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::anonymize::{anonymize_graph_with, anonymize_sources, AnonymizeOptions, ShiftMap};
use crate::explain::{explain_link, ExplainConfig, ExplanationBundle, TextIndex};
use crate::graph::{FilteredGraph, NodeId, PropertyGraph};
use crate::graphsheet::{collect_facts, utc_timestamp, RunInfo, RunRecord};
use crate::linkpred::model::score_link;
use crate::linkpred::{io as model_io, train, LinkModel, ModelKind, PredictedLink, TrainConfig};
use crate::matching::{
    entity_graph, write_review_queue, MatchConfig, MatchEngine, Resolution, Thresholds, WeightTable,
};
use crate::service::RUN_RECORD_FILE;
use crate::sources::{read_sources, write_sources, SourceBundle};

pub const MATCH_SCORES_FILE: &str = "match_scores.jsonl";
pub const CLERICAL_REVIEW_FILE: &str = "clerical_review.jsonl";
pub const RESOLUTION_FILE: &str = "resolution.json";
/// Marker written next to anonymized outputs; its presence sets the GraphSheet flag.
pub const ANONYMIZED_MARKER: &str = "anonymized.json";
/// Subdirectory of a model directory holding the graph the model was trained on.
pub const TRAIN_GRAPH_DIR: &str = "graph";
/// Components smaller than this are dropped before training.
pub const MIN_COMPONENT: usize = 10;

/// Reads TOML, or JSON when the extension is `.json`.
pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    } else {
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Counts reported by [`resolve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolveSummary {
    pub records: usize,
    pub entities: usize,
    pub scored_pairs: usize,
    pub auto_links: usize,
    pub clerical_review: usize,
    pub relationships: usize,
}

pub struct Resolved {
    pub engine: MatchEngine,
    pub resolution: Resolution,
    pub graph: PropertyGraph,
    pub summary: ResolveSummary,
}

/// Scores, decides and merges a source bundle into an entity graph.
pub fn resolve(bundle: &SourceBundle, config: MatchConfig, weights: Option<WeightTable>) -> Result<Resolved> {
    let thresholds = config.thresholds;
    let engine = match weights {
        Some(w) => MatchEngine::with_weights(&bundle.records, config, w),
        None => MatchEngine::fit(&bundle.records, config),
    };
    let resolution = engine.resolve(&thresholds)?;
    let graph = entity_graph(&bundle.records, &resolution, &bundle.links);
    let summary = ResolveSummary {
        records: bundle.records.len(),
        entities: graph.node_count(),
        scored_pairs: resolution.decisions.len(),
        auto_links: resolution.link_count(),
        clerical_review: resolution.review_queue().len(),
        relationships: graph.edge_count(),
    };
    Ok(Resolved { engine, resolution, graph, summary })
}

/// Writes the entity graph, every match score, the clerical-review queue and the summary.
pub fn write_resolved(resolved: &Resolved, out: &Path) -> Result<()> {
    resolved.graph.save(out)?;
    let all: Vec<_> = resolved.resolution.decisions.iter().map(|d| &d.score).collect();
    write_review_queue(&out.join(MATCH_SCORES_FILE), &all)?;
    write_review_queue(&out.join(CLERICAL_REVIEW_FILE), &resolved.resolution.review_queue())?;
    std::fs::write(out.join(RESOLUTION_FILE), serde_json::to_string_pretty(&resolved.summary)? + "\n")?;
    Ok(())
}

/// `mdm resolve`: sources directory in, graph directory out.
pub fn resolve_dir(
    sources: &Path,
    config: MatchConfig,
    thresholds: Option<Thresholds>,
    weights: Option<&Path>,
    out: &Path,
) -> Result<ResolveSummary> {
    let bundle = read_sources(sources).with_context(|| format!("reading sources from {}", sources.display()))?;
    let mut config = config;
    if let Some(t) = thresholds {
        config.thresholds = t;
    }
    let resolved = resolve(&bundle, config, None)?;
    write_resolved(&resolved, out)?;
    if let Some(path) = weights {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        resolved.engine.weights.save(path)?;
    }
    copy_marker(sources, out)?;
    Ok(resolved.summary)
}

fn copy_marker(from: &Path, to: &Path) -> Result<()> {
    let marker = from.join(ANONYMIZED_MARKER);
    if marker.exists() {
        std::fs::copy(&marker, to.join(ANONYMIZED_MARKER))?;
    }
    Ok(())
}

pub fn is_anonymized(dir: &Path) -> bool {
    dir.join(ANONYMIZED_MARKER).exists()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AnonymizedMarker {
    seed: u64,
    at: String,
}

/// `mdm anonymize`: a graph directory, or a raw sources directory when
/// `sources` is set. The shift map is written only when `keep_map` is given.
pub fn anonymize_dir(input: &Path, out: &Path, seed: u64, keep_map: Option<&Path>, sources: bool) -> Result<()> {
    let opts = AnonymizeOptions { seed, keep_map: keep_map.is_some(), ..AnonymizeOptions::default() };
    let map: Option<ShiftMap> = if sources {
        let bundle = read_sources(input)?;
        let (anon, map) = anonymize_sources(&bundle, &opts)?;
        write_sources(out, &anon.records, &anon.links)?;
        map
    } else {
        let g = PropertyGraph::load(input)?;
        let (anon, map) = anonymize_graph_with(&g, &opts)?;
        anon.save(out)?;
        map
    };
    let marker = AnonymizedMarker { seed, at: utc_timestamp(std::time::SystemTime::now()) };
    std::fs::write(out.join(ANONYMIZED_MARKER), serde_json::to_string_pretty(&marker)? + "\n")?;
    if let (Some(path), Some(map)) = (keep_map, map) {
        map.save(path)?;
    }
    Ok(())
}

/// A trained model with its GraphSheet record and the graph it was fitted on.
pub struct TrainedRun {
    pub model: LinkModel,
    pub record: RunRecord,
    pub train_graph: FilteredGraph,
}

/// Drops small components, runs the training protocol and collects GraphSheet facts.
pub fn train_run(
    g: &PropertyGraph,
    kind: ModelKind,
    config: &TrainConfig,
    dataset_id: &str,
    anonymized: bool,
) -> Result<TrainedRun> {
    let mut info = RunInfo::new(dataset_id, kind);
    let train_graph = g.filter_components(MIN_COMPONENT)?;
    let outcome = train(&train_graph.graph, config, kind)?;
    info.finished_at = utc_timestamp(std::time::SystemTime::now());
    let record = collect_facts(&train_graph.graph, &info, config, &outcome.report, anonymized);
    Ok(TrainedRun { model: outcome.model, record, train_graph })
}

/// Writes `model.bin`, `run_record.json` and the training graph under `out`.
pub fn write_run(run: &TrainedRun, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    model_io::save(&run.model, out)?;
    std::fs::write(out.join(RUN_RECORD_FILE), run.record.to_json())?;
    run.train_graph.graph.save(&out.join(TRAIN_GRAPH_DIR))?;
    Ok(())
}

/// `mdm train`: graph directory in, model directory out.
pub fn train_dir(graph_dir: &Path, kind: ModelKind, config: &TrainConfig, out: &Path) -> Result<TrainedRun> {
    let g = PropertyGraph::load(graph_dir).with_context(|| format!("loading graph from {}", graph_dir.display()))?;
    let dataset_id = graph_dir
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "graph".into());
    let run = train_run(&g, kind, config, &dataset_id, is_anonymized(graph_dir))?;
    write_run(&run, out)?;
    Ok(run)
}

/// Loads a model and the graph it should be applied to (its training graph by default).
pub fn load_model(model_dir: &Path, graph_dir: Option<&Path>) -> Result<(LinkModel, PropertyGraph)> {
    let model = model_io::load(model_dir).with_context(|| format!("loading model from {}", model_dir.display()))?;
    let default_graph = model_dir.join(TRAIN_GRAPH_DIR);
    let dir = graph_dir.unwrap_or(&default_graph);
    let g = PropertyGraph::load(dir).with_context(|| format!("loading graph from {}", dir.display()))?;
    Ok((model, g))
}

/// Node ids, one per line; blank lines and `#` comments are ignored.
pub fn parse_watchlist(text: &str) -> Result<Vec<NodeId>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse::<u32>().map(NodeId).with_context(|| format!("bad node id {l:?}")))
        .collect()
}

/// Parses `u,v`.
pub fn parse_pair(s: &str) -> Result<(NodeId, NodeId)> {
    let Some((a, b)) = s.split_once(',') else { bail!("expected U,V but got {s:?}") };
    Ok((NodeId(a.trim().parse()?), NodeId(b.trim().parse()?)))
}

/// Scores one pair and builds its explanation bundle.
pub fn explain_pair(
    model: &LinkModel,
    g: &PropertyGraph,
    index: &TextIndex,
    u: NodeId,
    v: NodeId,
    config: &ExplainConfig,
) -> Result<ExplanationBundle> {
    for n in [u, v] {
        if !g.contains(n) {
            bail!("node {n} is not in the graph");
        }
    }
    let emb = model.embed(g)?;
    let pred = PredictedLink { watch: u, candidate: v, probability: score_link(&emb, u, v) };
    Ok(explain_link(g, index, &[pred], u, v, config)?)
}

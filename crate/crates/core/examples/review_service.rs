//! Drive the steward review API in-process: submit a watchlist, read an
//! explanation, record a decision and move the thresholds.
//!
//! ```text
//! cargo run --release --example review_service
//! ```
//!
//! `mdm serve` exposes the same router over TCP.

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use mdm::datagen::{self, GeneratorConfig};
use mdm::explain::{ExplainConfig, TextIndex};
use mdm::linkpred::{ModelKind, TrainConfig};
use mdm::matching::{MatchConfig, Thresholds};
use mdm::pipeline;
use mdm::service::store::ReviewStore;
use mdm::service::{router, AppState, Artifacts};
use mdm::sources::SourceBundle;

async fn call(app: &axum::Router, method: &str, uri: &str, body: Option<Value>) -> anyhow::Result<(StatusCode, Value)> {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = req.header("x-steward-id", "example-steward");
    let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))?;
    let res = app.clone().oneshot(req).await?;
    let status = res.status();
    let bytes = res.into_body().collect().await?.to_bytes();
    Ok((status, serde_json::from_slice(&bytes).unwrap_or(Value::Null)))
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    let ds = datagen::generate(&GeneratorConfig { n_entities: 500, ..GeneratorConfig::default() })?;
    let bundle = SourceBundle { records: ds.records.clone(), links: ds.record_links() };
    let resolved = pipeline::resolve(&bundle, MatchConfig::default(), None)?;
    let config = TrainConfig { runs: 1, epochs: 60, ..TrainConfig::default() };
    let run = pipeline::train_run(&resolved.graph, ModelKind::Pgnn, &config, "demo-500", false)?;

    let artifacts = Artifacts {
        graph: run.train_graph.graph.clone(),
        model: run.model,
        index: TextIndex::from_records(&bundle.records),
        scores: resolved.resolution.decisions.into_iter().map(|d| d.score).collect(),
        run_record: Some(run.record),
    };
    let dir = tempfile::tempdir()?;
    let store = ReviewStore::open(&dir.path().join("review_log.jsonl"), Thresholds::default())?;
    let app = router(AppState::new(artifacts, store, ExplainConfig::default()));

    println!("{:?}", call(&app, "GET", "/health", None).await?);
    let (_, queued) = call(&app, "POST", "/watchlist", Some(json!({"node_ids": [0, 1, 2], "top_k": 5}))).await?;
    println!("queued {} predictions", queued["enqueued"].as_array().map_or(0, Vec::len));

    let (_, page) = call(&app, "GET", "/predictions?status=pending&limit=3", None).await?;
    for item in page["items"].as_array().into_iter().flatten() {
        println!("  #{} {} -- {} p={:.4}", item["id"], item["u"], item["v"], item["probability"].as_f64().unwrap_or(0.0));
    }

    let (_, explanation) = call(&app, "GET", "/predictions/1/explanation", None).await?;
    println!("explanation has {} paths", explanation["paths"]["paths"].as_array().map_or(0, Vec::len));

    let decision = json!({"decision": "accept", "note": "same household"});
    let (status, record) = call(&app, "POST", "/predictions/1/feedback", Some(decision.clone())).await?;
    println!("feedback {status}: status={} steward={}", record["status"], record["steward"]);
    let (status, _) = call(&app, "POST", "/predictions/1/feedback", Some(decision)).await?;
    println!("second decision {status}");

    let (_, before) = call(&app, "GET", "/thresholds", None).await?;
    let (_, after) = call(&app, "PUT", "/thresholds", Some(json!({"autolink": 25.0, "review": 8.0}))).await?;
    println!("counts at 20:11 {}\ncounts at 25:8  {}", before["counts"], after["counts"]);
    Ok(())
}

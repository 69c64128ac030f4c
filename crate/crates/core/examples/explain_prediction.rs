//! Explain a predicted link: ranked connecting paths, supporting sentences
//! from the free-text feed, and an attribute-by-attribute comparison.
//!
//! ```text
//! cargo run --release --example explain_prediction
//! ```

use mdm::datagen::{self, GeneratorConfig};
use mdm::explain::{ExplainConfig, TextIndex};
use mdm::linkpred::{watchlist_predict, ModelKind, TrainConfig, WatchlistOptions};
use mdm::pipeline;

fn main() -> anyhow::Result<()> {
    let ds = datagen::generate(&GeneratorConfig { n_entities: 600, ..GeneratorConfig::default() })?;
    let config = TrainConfig { runs: 1, epochs: 100, ..TrainConfig::default() };
    let run = pipeline::train_run(&ds.truth_graph(), ModelKind::Pgnn, &config, "demo-600", false)?;
    let g = &run.train_graph.graph;
    let index = TextIndex::from_records(&ds.records);

    let opts = WatchlistOptions { top_k: 1, max_hops: Some(3) };
    let top = watchlist_predict(&run.model, g, &[mdm::graph::NodeId(3)], opts)?;
    let p = top.first().expect("a candidate within three hops");
    let bundle = pipeline::explain_pair(&run.model, g, &index, p.watch, p.candidate, &ExplainConfig::default())?;

    println!("link {} -- {} scored {:.4}", bundle.u, bundle.v, bundle.score);
    println!("\npaths:");
    for r in &bundle.paths.paths {
        let hops: Vec<String> =
            r.breakdown.iter().map(|t| format!("{} -[{}]-> {}", t.from, t.relation.as_str(), t.to)).collect();
        println!("  #{} score {:.3}: {}", r.rank, r.score, hops.join(", "));
    }
    println!("\nevidence:");
    if bundle.evidence.items.is_empty() {
        println!("  (no supporting text found)");
    }
    for e in &bundle.evidence.items {
        println!("  [{}] both={} terms={:?}\n    {}", e.source_record_id, e.both_endpoints, e.match_terms, e.snippet);
    }
    println!("\nattributes (neighbor Jaccard {:.3}):", bundle.comparison.neighbor_jaccard);
    for (attr, c) in &bundle.comparison.attributes {
        println!("  {attr:<12} {:<24} {:<24} {:.2}", c.value_u, c.value_v, c.similarity);
    }
    Ok(())
}

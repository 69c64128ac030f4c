//! Upload a watchlist and rank the people most likely linked to it.
//!
//! ```text
//! cargo run --release --example predict_watchlist
//! ```

use mdm::datagen::{self, GeneratorConfig};
use mdm::graph::NodeId;
use mdm::linkpred::{watchlist_predict, ModelKind, TrainConfig, WatchlistOptions};
use mdm::pipeline;

fn main() -> anyhow::Result<()> {
    let ds = datagen::generate(&GeneratorConfig { n_entities: 600, ..GeneratorConfig::default() })?;
    let config = TrainConfig { runs: 1, epochs: 100, ..TrainConfig::default() };
    let run = pipeline::train_run(&ds.truth_graph(), ModelKind::Pgnn, &config, "demo-600", false)?;
    let g = &run.train_graph.graph;

    let watchlist = pipeline::parse_watchlist("# flagged people\n0\n17\n42\n")?;
    let opts = WatchlistOptions { top_k: 10, max_hops: Some(3) };
    let predictions = watchlist_predict(&run.model, g, &watchlist, opts)?;

    let name = |id: NodeId| {
        let n = g.node(id).expect("node in graph");
        format!("{} {}", n.attr("given_name").unwrap_or("?"), n.attr("surname").unwrap_or("?"))
    };
    println!("{:>6} {:<24} {:>6} {:<24} probability", "watch", "", "cand", "");
    for p in &predictions {
        println!(
            "{:>6} {:<24} {:>6} {:<24} {:.4}",
            p.watch.0,
            name(p.watch),
            p.candidate.0,
            name(p.candidate),
            p.probability
        );
    }
    Ok(())
}

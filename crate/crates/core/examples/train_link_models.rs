//! Train GCN and P-GNN on the demo graph with the held-out link protocol and
//! compare their ROC AUC.
//!
//! ```text
//! cargo run --release --example train_link_models
//! ```

use std::time::Instant;

use mdm::datagen::{self, GeneratorConfig};
use mdm::linkpred::{split_links, train, ModelKind, TrainConfig};

fn main() -> anyhow::Result<()> {
    let ds = datagen::generate(&GeneratorConfig::default())?;
    let g = ds.truth_graph().filter_components(10)?.graph;
    let config = TrainConfig::default();

    let split = split_links(&g, config.positive_fraction, config.seed)?;
    println!(
        "graph: {} nodes, {} links; held out {} positives and {} negatives",
        g.node_count(),
        g.edge_count(),
        split.positives.len(),
        split.negatives.len()
    );

    for kind in [ModelKind::Gcn, ModelKind::Pgnn] {
        let start = Instant::now();
        let outcome = train(&g, &config, kind)?;
        let r = &outcome.report;
        println!(
            "{:<5} ROC AUC {:.4} ± {:.4}  accuracy {:.4}  pos-acc {:.4}  pos-on-neg {:.4}  ({:.1?})",
            kind.as_str(),
            r.roc_auc.mean,
            r.roc_auc.std_dev,
            r.accuracy.mean,
            r.positive_sample_accuracy.mean,
            r.positive_predictions_on_negatives.mean,
            start.elapsed()
        );
    }
    Ok(())
}

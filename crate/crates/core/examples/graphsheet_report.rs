//! Train a model and print the GraphSheet that documents the run.
//!
//! ```text
//! cargo run --release --example graphsheet_report -- [md|json]
//! ```

use mdm::datagen::{self, GeneratorConfig};
use mdm::graphsheet::{render_graphsheet, RunRecord, SheetFormat};
use mdm::linkpred::{ModelKind, TrainConfig};
use mdm::pipeline;

fn main() -> anyhow::Result<()> {
    let format: SheetFormat = std::env::args().nth(1).as_deref().unwrap_or("md").parse().map_err(anyhow::Error::msg)?;
    let ds = datagen::generate(&GeneratorConfig { n_entities: 500, ..GeneratorConfig::default() })?;
    let config = TrainConfig { runs: 2, epochs: 60, ..TrainConfig::default() };
    let run = pipeline::train_run(&ds.truth_graph(), ModelKind::Pgnn, &config, "demo-500", false)?;

    let json = run.record.to_json();
    assert_eq!(RunRecord::from_json(&json)?, run.record, "the JSON form is lossless");
    println!("{}", render_graphsheet(&run.record, format)?);
    Ok(())
}

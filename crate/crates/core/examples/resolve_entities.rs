//! Resolve the three noisy feeds into one node per person and score the
//! result against the generator's ground truth.
//!
//! ```text
//! cargo run --release --example resolve_entities
//! ```

use std::time::Instant;

use mdm::datagen::{self, GeneratorConfig};
use mdm::matching::{candidate_recall, pairwise_eval, MatchConfig};
use mdm::pipeline;
use mdm::sources::SourceBundle;

fn main() -> anyhow::Result<()> {
    for typo_rate in [0.0, 0.1] {
        let ds = datagen::generate(&GeneratorConfig { typo_rate, ..GeneratorConfig::default() })?;
        let bundle = SourceBundle { records: ds.records.clone(), links: ds.record_links() };

        let start = Instant::now();
        let resolved = pipeline::resolve(&bundle, MatchConfig::default(), None)?;
        let elapsed = start.elapsed();

        let truth: Vec<&str> = bundle.records.iter().map(|r| ds.truth.record_entity[&r.record_id].as_str()).collect();
        let eval = pairwise_eval(&resolved.resolution.record_cluster, &truth);
        let recall = candidate_recall(&resolved.engine.candidates(), &truth);

        println!("typo rate {typo_rate}");
        println!("  {:?}", resolved.summary);
        println!("  precision {:.4} recall {:.4} F1 {:.4}", eval.precision, eval.recall, eval.f1);
        println!("  candidate recall {recall:.4}, {elapsed:.2?}");
        if let Some(pair) = resolved.resolution.review_queue().first() {
            println!("  first clerical-review pair {} / {} total {:.2}", pair.a, pair.b, pair.total);
            for (attr, w) in &pair.contributions {
                println!("    {attr:<12} {w:+.2}");
            }
        }
    }
    Ok(())
}

//! Generate the seeded demo dataset and look at what came out.
//!
//! ```text
//! cargo run --release --example generate_dataset -- [out_dir]
//! ```

use std::collections::BTreeMap;

use mdm::datagen::{self, GeneratorConfig};
use mdm::sources::Source;

fn main() -> anyhow::Result<()> {
    let config = GeneratorConfig { n_entities: 1000, ..GeneratorConfig::default() };
    let ds = datagen::generate(&config)?;

    println!("entities            {}", ds.entities.len());
    println!("source records      {}", ds.records.len());
    println!("relationships       {}", ds.links.len());
    println!("rewire probability  {:.4}", ds.rewire_probability);
    println!("avg path length     {:.2} (target {})", ds.avg_path_length, config.target_avg_path_length);

    let mut per_source: BTreeMap<Source, usize> = BTreeMap::new();
    for r in &ds.records {
        *per_source.entry(r.source).or_default() += 1;
    }
    println!("records per source  {per_source:?}");

    let mut dupes: BTreeMap<&str, usize> = BTreeMap::new();
    for entity in ds.truth.record_entity.values() {
        *dupes.entry(entity.as_str()).or_default() += 1;
    }
    let mut histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for k in dupes.values() {
        *histogram.entry(*k).or_default() += 1;
    }
    println!("records per entity  {histogram:?}");

    let first = &ds.truth.record_entity.iter().next().expect("records").1;
    for r in ds.records.iter().filter(|r| &&ds.truth.record_entity[&r.record_id] == first) {
        println!("  {:?} {} {:?}", r.source, r.record_id, r.attributes);
    }

    if let Some(dir) = std::env::args().nth(1) {
        let manifest = ds.write(dir.as_ref())?;
        println!("wrote {} files to {dir}", manifest.files.len());
    }
    Ok(())
}

//! Pseudonymize a resolved graph, keep the shift map, and check that nothing
//! sensitive survived.
//!
//! ```text
//! cargo run --release --example anonymize_graph
//! ```

use std::collections::BTreeMap;

use mdm::anonymize::{anonymize_graph, leaked_values, AnonymizerSchema};
use mdm::datagen::{self, GeneratorConfig};
use mdm::graph::{NodeId, PropertyGraph};

fn attributes(g: &PropertyGraph) -> Vec<BTreeMap<String, String>> {
    g.nodes().iter().map(|n| n.attributes.clone()).collect()
}

fn main() -> anyhow::Result<()> {
    let ds = datagen::generate(&GeneratorConfig { n_entities: 500, ..GeneratorConfig::default() })?;
    let g = ds.truth_graph();
    let (anon, map) = anonymize_graph(&g, 7, true)?;
    let map = map.expect("keep_map was requested");

    let before = g.node(NodeId(0)).expect("node 0");
    let after = anon.node(NodeId(0)).expect("node 0");
    println!("{:<12} {:<28} pseudonym", "attribute", "original");
    for (k, v) in &before.attributes {
        println!("{k:<12} {v:<28} {}", after.attributes[k]);
    }

    println!("\nsame edges: {}", g.edges() == anon.edges());
    let leaks = leaked_values(&attributes(&g), &attributes(&anon), &AnonymizerSchema::default());
    println!("original values found in output: {}", leaks.len());
    for (class, values) in &map.values {
        println!("shift map {class:?}: {} entries", values.len());
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("shift_map.json");
    map.save(&path)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        println!("map file mode {:o}", std::fs::metadata(&path)?.permissions().mode() & 0o777);
    }
    Ok(())
}

use std::path::Path;
use std::process::Command;

fn mdm(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_mdm")).current_dir(dir).args(args).output().unwrap();
    assert!(out.status.success(), "mdm {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("gen.toml"), "n_entities = 200\nseparation_samples = 10\n").unwrap();
    std::fs::write(dir.join("train.toml"), "epochs = 10\nruns = 1\nanchors = 16\n").unwrap();
    std::fs::write(dir.join("watch.txt"), "# watchlist\n0\n3\n").unwrap();

    let manifest: serde_json::Value =
        serde_json::from_str(&mdm(dir, &["datagen", "--config", "gen.toml", "--seed", "5", "--out", "data"])).unwrap();
    assert_eq!(manifest["seed"], 5);
    assert_eq!(manifest["n_entities"], 200);

    let summary: serde_json::Value = serde_json::from_str(&mdm(
        dir,
        &["resolve", "--sources", "data", "--out", "graph", "--weights", "out/weights.json", "--thresholds", "20:11"],
    ))
    .unwrap();
    assert!(summary["entities"].as_u64().unwrap() >= 190);
    for f in ["nodes.jsonl", "edges.jsonl", "match_scores.jsonl", "clerical_review.jsonl"] {
        assert!(dir.join("graph").join(f).exists(), "{f}");
    }
    assert!(dir.join("out/weights.json").exists());

    mdm(dir, &["anonymize", "--in", "graph", "--out", "anon", "--seed", "9", "--keep-map", "map.json"]);
    assert!(dir.join("anon/anonymized.json").exists());
    assert!(dir.join("map.json").exists());

    mdm(dir, &["train", "--graph", "anon", "--model", "gcn", "--config", "train.toml", "--out", "model"]);
    let record = std::fs::read_to_string(dir.join("model/run_record.json")).unwrap();
    let record = mdm::graphsheet::RunRecord::from_json(&record).unwrap();
    assert!(record.anonymized);
    assert_eq!(record.train_config.epochs, 10);

    let preds = mdm(dir, &["predict", "--model", "model", "--watchlist", "watch.txt", "--top-k", "4"]);
    assert_eq!(preds.lines().count(), 4);

    let bundle: serde_json::Value =
        serde_json::from_str(&mdm(dir, &["explain", "--model", "model", "--pair", "0,1", "--corpus", "data/source_text.txt"]))
            .unwrap();
    assert_eq!(bundle["u"], 0);
    assert!(bundle["comparison"]["attributes"].is_object());

    let md = mdm(dir, &["graphsheet", "--run", "model", "--format", "md"]);
    assert!(md.contains("## Caveats"));
    let json = mdm(dir, &["graphsheet", "--run", "model", "--format", "json"]);
    assert_eq!(mdm::graphsheet::RunRecord::from_json(&json).unwrap(), record);
}

#[test]
fn errors_exit_non_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_mdm")).current_dir(tmp.path()).args(["graphsheet", "--run", "nowhere"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
    let out = Command::new(env!("CARGO_BIN_EXE_mdm")).args(["resolve", "--sources", "x", "--out", "y", "--thresholds", "5:9"]).output().unwrap();
    assert!(!out.status.success());
}

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use mdm::datagen::{self, GeneratorConfig};
use mdm::explain::{ExplainConfig, TextIndex};
use mdm::graphsheet::{render_graphsheet, RunRecord, SheetFormat};
use mdm::linkpred::{watchlist_predict, ModelKind, TrainConfig, WatchlistOptions};
use mdm::matching::{MatchConfig, Thresholds};
use mdm::pipeline::{self, load_config};
use mdm::service::{self, ServeConfig, RUN_RECORD_FILE};

/// Master data management toolkit: synthetic data, entity resolution,
/// anonymization, link prediction, explanations and a review service.
#[derive(Debug, Parser)]
#[command(name = "mdm", version)]
struct Cli {
    /// Seed overriding the one in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Config file for the subcommand (TOML, or JSON by extension).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log more detail to stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic multi-source dataset with ground truth.
    Datagen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Resolve source records into an entity graph.
    Resolve {
        #[arg(long)]
        sources: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the fitted weight table.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// AUTOLINK:REVIEW, e.g. 20:11.
        #[arg(long)]
        thresholds: Option<Thresholds>,
    },
    /// Pseudonymize a graph directory (or a sources directory with --sources).
    Anonymize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep the shift map at this path (written with owner-only permissions).
        #[arg(long)]
        keep_map: Option<PathBuf>,
        /// Treat the input as raw sources rather than a resolved graph.
        #[arg(long)]
        sources: bool,
    },
    /// Train a link-prediction model and write its GraphSheet record.
    Train {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value = "pgnn")]
        model: ModelKind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank candidate links for a watchlist of node ids.
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Graph to score; defaults to the model's training graph.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// File with one node id per line.
        #[arg(long)]
        watchlist: PathBuf,
        #[arg(long, default_value_t = 50)]
        top_k: usize,
        #[arg(long)]
        max_hops: Option<u32>,
        /// Output JSON lines; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Explain a predicted link as a JSON bundle.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// U,V
        #[arg(long)]
        pair: String,
        /// `record_id<TAB>text` corpus, e.g. source_text.txt.
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Render the GraphSheet of a training run.
    Graphsheet {
        #[arg(long)]
        run: PathBuf,
        #[arg(long, default_value = "md")]
        format: SheetFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the review API.
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        /// Match scores from `mdm resolve`.
        #[arg(long)]
        scores: PathBuf,
        /// Review log; defaults to review_log.jsonl in the model directory.
        #[arg(long)]
        review_log: Option<PathBuf>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        /// Static UI assets to serve under /.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        /// Initial thresholds when the review log has none.
        #[arg(long)]
        thresholds: Option<Thresholds>,
    },
}

fn config_or_default<T: serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    path.map(load_config).transpose().map(Option::unwrap_or_default)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => Ok(other?),
        },
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    write_output(None, &(serde_json::to_string_pretty(value)? + "\n"))
}

fn run(cli: Cli) -> Result<()> {
    let config = cli.config.as_deref();
    match cli.command {
        Command::Datagen { out } => {
            let mut cfg = match config {
                Some(p) => GeneratorConfig::from_file(p)?,
                None => GeneratorConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let manifest = datagen::generate(&cfg)?.write(&out)?;
            print_json(&manifest)
        }
        Command::Resolve { sources, out, weights, thresholds } => {
            let cfg: MatchConfig = config_or_default(config)?;
            print_json(&pipeline::resolve_dir(&sources, cfg, thresholds, weights.as_deref(), &out)?)
        }
        Command::Anonymize { input, out, keep_map, sources } => {
            let seed = cli.seed.context("anonymize requires --seed")?;
            pipeline::anonymize_dir(&input, &out, seed, keep_map.as_deref(), sources)
        }
        Command::Train { graph, model, out } => {
            let mut cfg = match config {
                Some(p) => TrainConfig::from_toml(&std::fs::read_to_string(p)?)?,
                None => TrainConfig::default(),
            };
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            let run = pipeline::train_dir(&graph, model, &cfg, &out)?;
            print_json(&run.record.metrics)
        }
        Command::Predict { model, graph, watchlist, top_k, max_hops, out } => {
            let (m, g) = pipeline::load_model(&model, graph.as_deref())?;
            let ids = pipeline::parse_watchlist(&std::fs::read_to_string(&watchlist)?)?;
            let preds = watchlist_predict(&m, &g, &ids, WatchlistOptions { top_k, max_hops })?;
            let mut text = String::new();
            for p in &preds {
                text.push_str(&serde_json::to_string(p)?);
                text.push('\n');
            }
            write_output(out.as_deref(), &text)
        }
        Command::Explain { model, graph, pair, corpus } => {
            let cfg: ExplainConfig = config_or_default(config)?;
            let (m, g) = pipeline::load_model(&model, graph.as_deref())?;
            let index = TextIndex::load(&corpus).with_context(|| format!("reading {}", corpus.display()))?;
            let (u, v) = pipeline::parse_pair(&pair)?;
            print_json(&pipeline::explain_pair(&m, &g, &index, u, v, &cfg)?)
        }
        Command::Graphsheet { run, format, out } => {
            let path = run.join(RUN_RECORD_FILE);
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let record = RunRecord::from_json(&text)?;
            write_output(out.as_deref(), &render_graphsheet(&record, format)?)
        }
        Command::Serve { model, graph, corpus, scores, review_log, addr, ui_dir, thresholds } => {
            let cfg = ServeConfig {
                graph_dir: graph.unwrap_or_else(|| model.join(pipeline::TRAIN_GRAPH_DIR)),
                review_log: review_log.unwrap_or_else(|| model.join("review_log.jsonl")),
                model_dir: model,
                corpus,
                match_scores: scores,
                addr,
                ui_dir,
                explain: config_or_default(config)?,
                thresholds: thresholds.unwrap_or_default(),
            };
            let rt = tokio::runtime::Runtime::new()?;
            Ok(rt.block_on(service::serve(cfg))?)
        }
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    tracing_subscriber::fmt().with_max_level(level).with_writer(std::io::stderr).init();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

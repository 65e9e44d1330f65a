use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use excavator::app::{api, run_pipeline, server, AppError, PipelineConfig, Snapshot, TaggerChoice};
use excavator::corpus::{ingest_documents, monthly_article_counts};
use excavator::month::{MonthRange, YearMonth};
use excavator::tcag::{assign_focus_colors, tcag_value, FilterSpec};
use excavator::taxonomy::{discover_event_clusters, embed_phrases, ClusterParams};
use excavator::timeline::{event_monthly_counts, popularity_series, WindowPolicy, DEFAULT_WINDOW};
use excavator::vectors::HashedNgramEncoder;

#[derive(Parser)]
#[command(name = "excavator", version, about = "Event and relation extraction into a temporal and causal analysis graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a JSONL corpus and report what would be processed.
    Ingest {
        #[arg(long = "input", required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Run the full pipeline and write artifacts to --out.
    Extract(ExtractArgs),
    /// Print a filtered graph from a pipeline output directory.
    Graph {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        geo: Option<String>,
        #[arg(long)]
        month: Option<YearMonth>,
        #[arg(long, default_value_t = 1)]
        min_count: u64,
        /// Drop mentions lacking the filtered attribute.
        #[arg(long)]
        strict_filter: bool,
        /// Count mentions toward ancestor types as well.
        #[arg(long)]
        rollup: bool,
        #[arg(long)]
        focus: Option<String>,
    },
    /// Print a popularity series from a pipeline output directory.
    Timeline {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        event: String,
        #[arg(long)]
        geo: Option<String>,
        #[arg(long)]
        from: Option<YearMonth>,
        #[arg(long)]
        to: Option<YearMonth>,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        /// Divide every window by its full length.
        #[arg(long)]
        strict_window: bool,
    },
    /// Serve the HTTP API over a pipeline output directory.
    Serve {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Group candidate trigger phrases (one per line) into clusters.
    Cluster {
        #[arg(long)]
        phrases: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
    },
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    from: Option<YearMonth>,
    #[arg(long)]
    to: Option<YearMonth>,
    /// Tag triggers with the trained perceptron instead of the lexicon.
    #[arg(long)]
    perceptron: bool,
    /// Skip the neural relation classifier.
    #[arg(long)]
    no_neural: bool,
    /// Leave months unset when no time argument resolves.
    #[arg(long)]
    no_inherit_month: bool,
}

fn print_json(value: &serde_json::Value) -> Result<(), AppError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| AppError::new("output", e))?;
    writeln!(out).map_err(|e| AppError::new("output", e))
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Ingest { inputs } => {
            let mut documents = Vec::new();
            let (mut skipped, mut missing_date) = (0, 0);
            for path in &inputs {
                let file = File::open(path).map_err(|e| AppError::new("ingest", format!("{}: {e}", path.display())))?;
                let report = ingest_documents(BufReader::new(file)).map_err(|e| AppError::new("ingest", e))?;
                for d in &report.diagnostics {
                    eprintln!("{}: {d}", path.display());
                }
                skipped += report.skipped;
                missing_date += report.missing_date;
                documents.extend(report.documents);
            }
            let stats = monthly_article_counts(&documents);
            print_json(&serde_json::json!({
                "documents": documents.len(),
                "skipped_lines": skipped,
                "missing_date": missing_date,
                "articles_per_month": stats.articles_per_month,
            }))
        }
        Command::Extract(a) => {
            let range = match (a.from, a.to) {
                (None, None) => None,
                (f, t) => Some(MonthRange::new(
                    f.unwrap_or(YearMonth::new(1900, 1).expect("valid month")),
                    t.unwrap_or(YearMonth::new(2100, 12).expect("valid month")),
                )),
            };
            let config = PipelineConfig {
                inputs: a.inputs,
                taxonomy: a.taxonomy,
                lexicon: a.lexicon,
                gazetteer: a.gazetteer,
                patterns: a.patterns,
                out_dir: a.out,
                range,
                workers: a.workers,
                tagger: if a.perceptron { TaggerChoice::Perceptron } else { TaggerChoice::Lexicon },
                inherit_month: !a.no_inherit_month,
                neural: !a.no_neural,
                ..PipelineConfig::default()
            };
            let summary = run_pipeline(&config)?;
            print!("{summary}");
            Ok(())
        }
        Command::Graph { out, geo, month, min_count, strict_filter, rollup, focus } => {
            let snap = Snapshot::load(&out)?;
            let filter = FilterSpec {
                geo,
                month,
                min_edge_count: min_count,
                strict: strict_filter,
                rollup,
            };
            let graph = snap.filtered_tcag(&filter);
            let mut value = tcag_value(&graph);
            if let Some(f) = focus {
                let colors = assign_focus_colors(&graph, &f).map_err(|e| AppError::new("graph", e))?;
                value["colors"] = serde_json::json!(colors);
            }
            print_json(&value)
        }
        Command::Timeline { out, event, geo, from, to, window, strict_window } => {
            let snap = Snapshot::load(&out)?;
            if !snap.taxonomy.contains(&event) {
                return Err(AppError::new("timeline", format!("unknown event type `{event}`")));
            }
            let counts = event_monthly_counts(&snap.mentions, &event, geo.as_deref());
            let policy = if strict_window { WindowPolicy::Strict } else { WindowPolicy::Shrink };
            let mut series = popularity_series(&counts, &snap.corpus_stats(), window, policy)
                .map_err(|e| AppError::new("timeline", e))?;
            if let Some(corpus) = snap.corpus_stats().month_range() {
                series = series.restrict(&MonthRange::new(from.unwrap_or(corpus.from), to.unwrap_or(corpus.to)));
            }
            print_json(&serde_json::json!(series))
        }
        Command::Serve { out, bind } => {
            let snap = Snapshot::load(&out)?;
            // fail fast on a broken snapshot before binding
            let probe = api::handle(&snap, "/api/tcag", "");
            if probe.status != 200 {
                return Err(AppError::new("serve", probe.body));
            }
            server::serve(snap, bind).map_err(|e| AppError::new("serve", e))
        }
        Command::Cluster { phrases, threshold } => {
            let text = fs::read_to_string(&phrases).map_err(|e| AppError::new("cluster", e))?;
            let list: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
            let vectors = embed_phrases(&list, &HashedNgramEncoder::default());
            let params = ClusterParams {
                similarity_threshold: threshold,
                ..ClusterParams::default()
            };
            let clusters = discover_event_clusters(&vectors, &params).map_err(|e| AppError::new("cluster", e))?;
            let groups: Vec<&Vec<String>> = clusters.iter().map(|c| &c.phrases).collect();
            print_json(&serde_json::json!(groups))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

//! Command-line driver for the news similarity pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use newsim::corpus::{ArticleRecord, Politeness};
use newsim::pipeline::{self, IngestOptions, RunConfig, Stage, StageError, Workspace};

const EXIT_INPUT: u8 = 2;
const EXIT_MISSING: u8 = 3;
const EXIT_STAGE: u8 = 4;

#[derive(Parser)]
#[command(name = "newsim", version, about = "Multilingual news article similarity")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch, extract and store the articles referenced by a pair CSV.
    Ingest(IngestArgs),
    /// Extract the per-metric feature spans of every article.
    Features(ConfigArgs),
    /// Embed and pool the feature spans.
    Embed {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the span texts to embed as JSON lines instead of embedding.
        #[arg(long, value_name = "PATH")]
        export_requests: Option<PathBuf>,
    },
    /// Split the pairs and train one regression head per metric.
    Train(ConfigArgs),
    /// Score the test split with the baseline and the trained heads.
    Evaluate(ConfigArgs),
    /// Score one article pair with the trained heads.
    Predict {
        #[command(flatten)]
        config: ConfigArgs,
        /// Article JSON files as written by `ingest`.
        article1: PathBuf,
        article2: PathBuf,
    },
    /// Print the evaluation report.
    Report(ConfigArgs),
    /// Run features, embed, train and evaluate in order.
    Pipeline(ConfigArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Pair dataset CSV.
    pairs_csv: PathBuf,
    /// Output directory; articles go to `<out-dir>/articles`.
    out_dir: PathBuf,
    /// Maximum simultaneous downloads.
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    /// Minimum delay between requests to the same host, in milliseconds.
    #[arg(long, default_value_t = 500)]
    min_delay_ms: u64,
    /// Per-request timeout, in seconds.
    #[arg(long, default_value_t = 20)]
    timeout_secs: u64,
    /// Retries after a transient failure.
    #[arg(long, default_value_t = 2)]
    retries: u32,
}

#[derive(Args)]
struct ConfigArgs {
    /// Run config JSON file.
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    store: Option<PathBuf>,
    /// `stub` or `cache:<path>`.
    #[arg(long)]
    provider: Option<String>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    train_seed: Option<u64>,
    #[arg(long)]
    split_seed: Option<u64>,
}

impl ConfigArgs {
    /// Loads the config file and applies the flag overrides.
    fn load(&self) -> Result<RunConfig, newsim::Error> {
        let mut cfg = RunConfig::load(&self.config)?;
        if let Some(p) = &self.output_dir {
            cfg.output_dir = p.clone();
        }
        if let Some(p) = &self.pairs {
            cfg.corpus.pairs = p.clone();
        }
        if let Some(p) = &self.store {
            cfg.corpus.store = p.clone();
        }
        if let Some(p) = &self.provider {
            cfg.provider = p.clone();
        }
        // file paths are already absolute; flag paths resolve against the cwd
        cfg.resolve_paths(Path::new("."));
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.learning_rate {
            cfg.train.learning_rate = v;
        }
        if let Some(v) = self.momentum {
            cfg.train.momentum = v;
        }
        if let Some(v) = self.train_seed {
            cfg.train.seed = v;
        }
        if let Some(v) = self.split_seed {
            cfg.split.seed = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use newsim::Error as E;
    let core = err.chain().find_map(|e| {
        e.downcast_ref::<StageError>().map(|s| &s.source).or_else(|| e.downcast_ref::<newsim::Error>())
    });
    match core {
        Some(E::NotFound(_) | E::MissingEmbedding { .. }) => EXIT_MISSING,
        Some(E::Config(_) | E::Format(_) | E::Csv(_) | E::Json(_) | E::Argument(_) | E::Range { .. }) => EXIT_INPUT,
        Some(E::Io { .. }) if err.downcast_ref::<StageError>().is_none() => EXIT_INPUT,
        _ => EXIT_STAGE,
    }
}

fn read_article(path: &Path) -> anyhow::Result<ArticleRecord> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| newsim::Error::Argument(format!("cannot read article {}: {e}", path.display())))?;
    let article = serde_json::from_str(&text)
        .map_err(|e| newsim::Error::Format(format!("{} is not an article JSON: {e}", path.display())))?;
    Ok(article)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(args) => {
            let opts = IngestOptions {
                politeness: Politeness {
                    min_delay: Duration::from_millis(args.min_delay_ms),
                    timeout: Duration::from_secs(args.timeout_secs),
                    retries: args.retries,
                    ..Politeness::default()
                },
                concurrency: args.concurrency.max(1),
                ..IngestOptions::default()
            };
            let report = pipeline::ingest(&args.pairs_csv, &args.out_dir, &opts)?;
            println!(
                "ingested {} pairs: {} articles stored, {} reused, {} failures",
                report.pairs_ingested,
                report.articles_stored,
                report.articles_reused,
                report.failures.len()
            );
            for f in &report.failures {
                println!("  failed {} ({}): {}", f.article_id, f.url, f.reason);
            }
        }
        Command::Features(args) => {
            let cfg = args.load()?;
            let summary = pipeline::run_single(&cfg, Stage::Features, pipeline::extract)?;
            println!("extracted features for {} articles", summary.articles);
            for (metric, s) in &summary.metrics {
                println!("  {metric:<10} spans {:>6}  fallbacks {:>4}", s.spans, s.fallbacks);
            }
        }
        Command::Embed { config, export_requests } => {
            let cfg = config.load()?;
            match export_requests {
                Some(path) => {
                    let n = pipeline::run_single(&cfg, Stage::Embed, |c| pipeline::export_requests(c, &path))?;
                    println!("wrote {n} requests to {}", path.display());
                }
                None => {
                    pipeline::run_single(&cfg, Stage::Embed, pipeline::embed)?;
                    println!("wrote {}", Workspace::new(&cfg.output_dir).embeddings_dir().display());
                }
            }
        }
        Command::Train(args) => {
            let cfg = args.load()?;
            let history = pipeline::run_single(&cfg, Stage::Train, pipeline::train)?;
            for (metric, losses) in &history {
                println!("  {metric:<10} final train mse {:.6}", losses.last().copied().unwrap_or(f64::NAN));
            }
        }
        Command::Evaluate(args) => {
            let cfg = args.load()?;
            let report = pipeline::run_single(&cfg, Stage::Evaluate, pipeline::evaluate)?;
            print!("{}", report.render_table());
        }
        Command::Predict { config, article1, article2 } => {
            let cfg = config.load()?;
            let (a1, a2) = (read_article(&article1)?, read_article(&article2)?);
            let prediction = pipeline::predict(&cfg, &a1, &a2)?;
            println!("{}", serde_json::to_string_pretty(&prediction)?);
        }
        Command::Report(args) => {
            let cfg = args.load()?;
            print!("{}", pipeline::run_single(&cfg, Stage::Report, pipeline::render_report)?);
        }
        Command::Pipeline(args) => {
            let cfg = args.load()?;
            let report = pipeline::run_pipeline(&cfg)?;
            print!("{}", report.render_table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

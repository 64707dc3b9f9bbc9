//! `reclaim`: generate corpora, verify claim bundles, compute metrics.
//!
//! Exit codes: 0 success, 1 fatal error, 2 some applications failed to load.

use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tracing_subscriber::EnvFilter;

use reclaim_core::pipeline::{run_metrics, run_verify, BackendKind, RunConfig};
use reclaim_core::rules::Catalog;
use reclaim_core::synth::{generate, GenConfig};
use reclaim_core::textmetrics::{evaluate_pairs, parse_pairs, BleuParams};

#[derive(Parser, Debug)]
#[command(name = "reclaim", version, about = "Automated pre-screening of reimbursement-claim bundles")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// TOML file with run settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// Base URL of the remote extraction service.
    #[arg(long, global = true)]
    endpoint: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    max_file_mb: Option<u64>,
    /// Extra accepted extensions as `ext:kind` pairs, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    allow_ext: Vec<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendArg {
    Mock,
    Remote,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic corpus with fixture sidecars and ground-truth labels.
    GenCorpus(GenArgs),
    /// Ingest, extract, check and report every application of a corpus.
    Verify(VerifyArgs),
    /// Recompute metrics from verify outputs.
    Metrics(MetricsArgs),
    /// Score candidate texts against references.
    EvalText(EvalTextArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Target share of non-NA checks that come out auto-verified.
    #[arg(long, default_value_t = 0.76)]
    consistency: f64,
    #[arg(long, default_value_t = 0.0)]
    unsupported_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    reading_error_rate: f64,
    /// Weights of typologies 1..5, comma separated.
    #[arg(long, value_delimiter = ',')]
    mix: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Corpus root holding one directory per application.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Check catalog; the built-in one when omitted.
    #[arg(long)]
    catalog: Option<PathBuf>,
    #[arg(long)]
    fuzzy_threshold: Option<f64>,
    #[arg(long)]
    amount_tolerance_cents: Option<i64>,
    /// Maximum concurrent backend requests.
    #[arg(long)]
    extract_in_flight: Option<usize>,
    /// Skip the HTML renderings.
    #[arg(long)]
    no_html: bool,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// CSV `app_id,check_id,real_error,category`.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalTextArgs {
    /// JSON lines with `id`, `candidate`, `reference` and optional
    /// embeddings and activity labels.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_n: usize,
}

fn base_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::from_toml(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &global.out {
        cfg.out = v.clone();
    }
    if let Some(v) = global.parallelism {
        cfg.parallelism = v;
    }
    if let Some(v) = global.backend {
        cfg.backend = match v {
            BackendArg::Mock => BackendKind::Mock,
            BackendArg::Remote => BackendKind::Remote,
        };
    }
    if let Some(v) = &global.endpoint {
        cfg.endpoint = Some(v.clone());
    }
    if let Some(v) = global.seed {
        cfg.seed = v;
    }
    if let Some(v) = global.max_file_mb {
        cfg.max_file_mb = v;
    }
    if !global.allow_ext.is_empty() {
        cfg.allow_ext = global.allow_ext.clone();
    }
    Ok(cfg)
}

fn gen_corpus(cfg: &RunConfig, args: &GenArgs) -> Result<u8> {
    let mut gen = GenConfig {
        seed: cfg.seed,
        n_apps: args.n,
        consistency_rate: args.consistency,
        unsupported_rate: args.unsupported_rate,
        reading_error_rate: args.reading_error_rate,
        ..GenConfig::default()
    };
    if let Some(mix) = &args.mix {
        gen.typology_mix = match mix.as_slice().try_into() {
            Ok(m) => m,
            Err(_) => bail!("--mix needs five weights, got {}", mix.len()),
        };
    }
    let catalog = match &cfg.catalog {
        Some(p) => Catalog::load(p)?,
        None => Catalog::builtin(),
    };
    let corpus = generate(&gen, &catalog).map_err(anyhow::Error::msg)?;
    let paths = corpus.write(&cfg.out).with_context(|| format!("writing {}", cfg.out.display()))?;
    let totals = corpus.totals();
    tracing::info!(
        apps = %paths.apps.display(),
        labels = %paths.labels.display(),
        applications = totals.applications,
        documents = totals.documents,
        unsupported = totals.unsupported_documents,
        "corpus written"
    );
    Ok(0)
}

fn verify(mut cfg: RunConfig, args: &VerifyArgs) -> Result<u8> {
    if let Some(v) = &args.corpus {
        cfg.corpus = v.clone();
    }
    if let Some(v) = &args.catalog {
        cfg.catalog = Some(v.clone());
    }
    if args.fuzzy_threshold.is_some() {
        cfg.fuzzy_threshold = args.fuzzy_threshold;
    }
    if args.amount_tolerance_cents.is_some() {
        cfg.amount_tolerance_cents = args.amount_tolerance_cents;
    }
    if let Some(v) = args.extract_in_flight {
        cfg.extract_in_flight = v;
    }
    if args.no_html {
        cfg.html = false;
    }
    let manifest = run_verify(&cfg)?;
    let c = &manifest.counts;
    tracing::info!(
        processed = c.processed,
        failed = c.failed,
        documents = c.documents,
        unsupported = c.unsupported_documents,
        checks = c.checks,
        "verify finished"
    );
    Ok(manifest.exit_code() as u8)
}

fn metrics(cfg: &RunConfig, args: &MetricsArgs) -> Result<u8> {
    let summary = run_metrics(&cfg.out, args.labels.as_deref())?;
    tracing::info!(
        applications = summary.total.applications,
        suppression_rate = summary.total.suppression_rate,
        accuracy = summary.total.taxonomy.as_ref().map(|t| t.accuracy),
        "metrics written"
    );
    Ok(0)
}

fn eval_text(cfg: &RunConfig, args: &EvalTextArgs) -> Result<u8> {
    if args.max_n == 0 {
        bail!("--max-n must be at least 1");
    }
    let file = std::fs::File::open(&args.pairs).with_context(|| format!("opening {}", args.pairs.display()))?;
    let pairs = parse_pairs(BufReader::new(file)).map_err(anyhow::Error::msg)?;
    let report = evaluate_pairs(&pairs, BleuParams { max_n: args.max_n }).map_err(anyhow::Error::msg)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    write(&cfg.out.join("text_metrics.csv"), report.to_csv().as_bytes())?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write(&cfg.out.join("text_metrics.json"), &json)?;
    tracing::info!(pairs = pairs.len(), out = %cfg.out.display(), "text metrics written");
    Ok(0)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = base_config(&cli.global)?;
    match &cli.command {
        Command::GenCorpus(a) => gen_corpus(&cfg, a),
        Command::Verify(a) => verify(cfg, a),
        Command::Metrics(a) => metrics(&cfg, a),
        Command::EvalText(a) => eval_text(&cfg, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .json()
        .with_writer(std::io::stderr)
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            tracing::error!(error = format!("{e:#}"), "fatal");
            ExitCode::from(1)
        }
    }
}

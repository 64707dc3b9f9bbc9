//! Batch runs over a corpus directory: `verify` and `metrics`.
//!
//! Layout under the output directory:
//!
//! ```text
//! <out>/manifest.json
//! <out>/metrics.json
//! <out>/cost_time.csv
//! <out>/taxonomy.csv              (metrics with labels only)
//! <out>/<app_id>/{eligibility,common_core,typology}.json
//! <out>/<app_id>/{eligibility,common_core,typology}.html
//! <out>/<app_id>/extraction.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

use crate::extract::{extract, schema_for, ExtractedDocument, ExtractionBackend, MockBackend, RemoteBackend, RemoteConfig};
use crate::ingest::{load_corpus, ApplicationBundle, FormatPolicy, IngestError, LoadFailure, DEFAULT_MAX_FILE_MB};
use crate::report::{
    aggregate_metrics, cost_time_csv, cost_time_summary, parse_report_json, render_html, render_json, AppSummary,
    LabelError, Labels, MetricsSummary, ReportDocument, TaxonomyCounts,
};
use crate::rules::{Catalog, CatalogError, EvalParams, ReportKind, ReportOutcomes};
use crate::typology::TypologyId;

/// Environment variable holding the remote backend's API key.
pub const API_KEY_ENV: &str = "RECLAIM_API_KEY";

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.json";
pub const COST_TIME_FILE: &str = "cost_time.csv";
pub const TAXONOMY_FILE: &str = "taxonomy.csv";
pub const EXTRACTION_FILE: &str = "extraction.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Remote,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub out: PathBuf,
    pub backend: BackendKind,
    pub endpoint: Option<String>,
    /// Built-in catalog when unset.
    pub catalog: Option<PathBuf>,
    pub parallelism: usize,
    /// Upper bound on concurrent backend requests.
    pub extract_in_flight: usize,
    pub fuzzy_threshold: Option<f64>,
    pub amount_tolerance_cents: Option<i64>,
    pub max_file_mb: u64,
    /// `ext:kind` pairs, e.g. `tif:image`.
    pub allow_ext: Vec<String>,
    pub seed: u64,
    pub html: bool,
    pub remote_timeout_s: u64,
    pub remote_attempts: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            corpus: PathBuf::from("corpus"),
            out: PathBuf::from("out"),
            backend: BackendKind::Mock,
            endpoint: None,
            catalog: None,
            parallelism: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            extract_in_flight: 8,
            fuzzy_threshold: None,
            amount_tolerance_cents: None,
            max_file_mb: DEFAULT_MAX_FILE_MB,
            allow_ext: Vec::new(),
            seed: 1,
            html: true,
            remote_timeout_s: 60,
            remote_attempts: 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {problem}")]
    BadOutput { path: PathBuf, problem: String },
    #[error("no verify outputs under {0}")]
    MissingOutputs(PathBuf),
    #[error(transparent)]
    Labels(#[from] LabelError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.extract_in_flight == 0 {
            return bad("extract_in_flight must be at least 1".into());
        }
        if self.max_file_mb == 0 {
            return bad("max_file_mb must be at least 1".into());
        }
        if let Some(t) = self.fuzzy_threshold {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("fuzzy_threshold {t} outside [0, 1]"));
            }
        }
        if let Some(t) = self.amount_tolerance_cents {
            if t < 0 {
                return bad(format!("amount_tolerance_cents {t} is negative"));
            }
        }
        self.policy()?;
        match self.backend {
            BackendKind::Mock => {}
            BackendKind::Remote => {
                self.endpoint_url()?;
                if self.remote_attempts == 0 {
                    return bad("remote_attempts must be at least 1".into());
                }
            }
        }
        if !self.corpus.is_dir() {
            return bad(format!("corpus {} is not a directory", self.corpus.display()));
        }
        Ok(())
    }

    fn endpoint_url(&self) -> Result<Url, PipelineError> {
        let Some(raw) = self.endpoint.as_deref() else {
            return Err(PipelineError::Config("remote backend needs an endpoint".into()));
        };
        let url = Url::parse(raw).map_err(|e| PipelineError::Config(format!("endpoint {raw:?}: {e}")))?;
        if !matches!(url.scheme(), "http" | "https") || url.host().is_none() {
            return Err(PipelineError::Config(format!("endpoint {raw:?} is not an http(s) URL")));
        }
        Ok(url)
    }

    pub fn policy(&self) -> Result<FormatPolicy, PipelineError> {
        let policy = FormatPolicy {
            max_file_bytes: self.max_file_mb.saturating_mul(1024 * 1024),
            ..FormatPolicy::default()
        };
        if self.allow_ext.is_empty() {
            return Ok(policy);
        }
        policy
            .with_allowed(&self.allow_ext.join(","))
            .map_err(PipelineError::Config)
    }

    pub fn load_catalog(&self) -> Result<(Catalog, EvalParams), PipelineError> {
        let catalog = match &self.catalog {
            Some(p) => Catalog::load(p)?,
            None => Catalog::builtin(),
        };
        let mut params = EvalParams::from_catalog(&catalog);
        if let Some(t) = self.fuzzy_threshold {
            params.fuzzy_threshold = t;
        }
        if let Some(t) = self.amount_tolerance_cents {
            params.amount_tolerance_cents = t;
        }
        Ok((catalog, params))
    }

    /// The key is read from [`API_KEY_ENV`] here and nowhere else.
    pub fn backend(&self) -> Result<Box<dyn ExtractionBackend>, PipelineError> {
        match self.backend {
            BackendKind::Mock => Ok(Box::new(MockBackend::disk())),
            BackendKind::Remote => {
                let mut rc = RemoteConfig::new(self.endpoint_url()?);
                rc.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
                rc.max_in_flight = self.extract_in_flight;
                rc.timeout = Duration::from_secs(self.remote_timeout_s.max(1));
                rc.max_attempts = self.remote_attempts;
                let b = RemoteBackend::new(rc).map_err(|e| PipelineError::Config(format!("endpoint: {e}")))?;
                Ok(Box::new(b))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub applications: usize,
    pub processed: usize,
    pub failed: usize,
    pub documents: usize,
    pub unsupported_documents: usize,
    pub checks: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileLedger {
    pub processed: Vec<String>,
    pub unsupported: Vec<String>,
    pub failed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub app_id: Option<String>,
    pub rel_path: String,
    pub diagnostic: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub catalog_version: String,
    pub backend: String,
    pub counts: RunCounts,
    pub files: FileLedger,
    pub failures: Vec<RunFailure>,
}

impl Manifest {
    /// 0 when every application was processed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            2
        }
    }
}

/// Result of one application; the pipeline writes it out afterwards.
pub struct AppRun {
    pub bundle: ApplicationBundle,
    pub docs: Vec<ExtractedDocument>,
    pub outcomes: ReportOutcomes,
}

/// Extracts every document in path order and evaluates the catalog.
pub fn run_application(
    bundle: ApplicationBundle,
    backend: &dyn ExtractionBackend,
    catalog: &Catalog,
    params: &EvalParams,
) -> AppRun {
    let mut documents = bundle.documents.clone();
    documents.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));
    let docs: Vec<ExtractedDocument> = documents
        .iter()
        .map(|d| extract(d, &schema_for(d.slot, &bundle.typology), backend))
        .collect();
    let outcomes = crate::rules::evaluate_application(catalog, params, &bundle, &docs);
    AppRun { bundle, docs, outcomes }
}

pub fn report_documents(run: &AppRun, catalog_version: &str) -> Vec<ReportDocument> {
    ReportKind::ALL
        .iter()
        .map(|kind| ReportDocument {
            app_id: run.bundle.app_id.clone(),
            typology: run.bundle.typology.clone(),
            kind: *kind,
            catalog_version: catalog_version.to_string(),
            outcomes: run.outcomes.get(kind).cloned().unwrap_or_default(),
            unsupported_notices: run.bundle.unsupported.clone(),
            generated_at: None,
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn write_app(out: &Path, run: &AppRun, catalog_version: &str, html: bool) -> Result<(), PipelineError> {
    let dir = out.join(&run.bundle.app_id);
    std::fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    for report in report_documents(run, catalog_version) {
        let stem = report.kind.as_str();
        write_file(&dir.join(format!("{stem}.json")), &render_json(&report))?;
        if html {
            write_file(&dir.join(format!("{stem}.html")), &render_html(&report))?;
        }
    }
    let mut extraction = serde_json::to_vec_pretty(&run.docs).expect("serializable");
    extraction.push(b'\n');
    write_file(&dir.join(EXTRACTION_FILE), &extraction)
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

fn prefixed(app_id: Option<&str>, rel: &str) -> String {
    match app_id {
        Some(a) => format!("{a}/{rel}"),
        None => rel.to_string(),
    }
}

/// Runs ingest, extraction, rules and reporting over `config.corpus`.
///
/// Per-application problems (load failures, panics, write errors) end up
/// in the manifest; only configuration and corpus-root problems are `Err`.
pub fn run_verify(config: &RunConfig) -> Result<Manifest, PipelineError> {
    config.validate()?;
    let (catalog, params) = config.load_catalog()?;
    let backend = config.backend()?;
    let policy = config.policy()?;
    std::fs::create_dir_all(&config.out).map_err(io_err(&config.out))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| PipelineError::Config(format!("thread pool: {e}")))?;

    let scan = pool.install(|| load_corpus(&config.corpus, &policy))?;
    let mut failures: Vec<RunFailure> = Vec::new();
    let mut files = FileLedger::default();
    for f in &scan.failures {
        tracing::warn!(app_id = f.app_id.as_deref().unwrap_or(""), path = %f.rel_path, diagnostic = %f.diagnostic, "application skipped");
        record_load_failure(f, &mut failures, &mut files);
    }
    let mut counts = RunCounts {
        applications: scan.bundles.len() + scan.failures.iter().filter(|f| f.app_id.is_some()).count(),
        ..RunCounts::default()
    };

    let backend_ref: &dyn ExtractionBackend = backend.as_ref();
    let results: Vec<(ApplicationBundle, Result<AppSummary, String>)> = pool.install(|| {
        scan.bundles
            .into_par_iter()
            .map(|bundle| {
                let app_id = bundle.app_id.clone();
                let kept = bundle.clone();
                let result = catch_unwind(AssertUnwindSafe(|| {
                    let run = run_application(bundle, backend_ref, &catalog, &params);
                    write_app(&config.out, &run, &catalog.version, config.html).map_err(|e| e.to_string())?;
                    Ok::<_, String>(AppSummary::new(&run.bundle.app_id, &run.bundle.typology, &run.outcomes, &run.docs))
                }))
                .unwrap_or_else(|p| Err(format!("panic: {}", panic_message(&p))));
                match &result {
                    Ok(s) => tracing::info!(app_id = %app_id, checks = s.counts.total(), "application verified"),
                    Err(e) => tracing::error!(app_id = %app_id, error = %e, "application failed"),
                }
                (kept, result)
            })
            .collect()
    });

    let mut summaries = Vec::new();
    for (bundle, result) in results {
        let inputs = bundle.input_files();
        match result {
            Ok(summary) => {
                counts.processed += 1;
                counts.documents += bundle.documents.len();
                counts.unsupported_documents += bundle.unsupported.len();
                counts.checks += summary.counts.total() as usize;
                let unsupported: BTreeSet<&str> = bundle.unsupported.iter().map(|n| n.rel_path.as_str()).collect();
                for rel in &inputs {
                    let p = prefixed(Some(&bundle.app_id), rel);
                    if unsupported.contains(rel.as_str()) {
                        files.unsupported.push(p);
                    } else {
                        files.processed.push(p);
                    }
                }
                summaries.push(summary);
            }
            Err(diagnostic) => {
                failures.push(RunFailure {
                    app_id: Some(bundle.app_id.clone()),
                    rel_path: bundle.app_id.clone(),
                    diagnostic,
                });
                files.failed.extend(inputs.iter().map(|r| prefixed(Some(&bundle.app_id), r)));
            }
        }
    }
    counts.failed = failures.iter().filter(|f| f.app_id.is_some()).count();
    files.processed.sort();
    files.unsupported.sort();
    files.failed.sort();
    failures.sort_by(|a, b| a.rel_path.cmp(&b.rel_path));

    write_metrics(&config.out, summaries, false)?;
    let manifest = Manifest {
        config: config.clone(),
        catalog_version: catalog.version.clone(),
        backend: backend.id(),
        counts,
        files,
        failures,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
    bytes.push(b'\n');
    write_file(&config.out.join(MANIFEST_FILE), &bytes)?;
    Ok(manifest)
}

fn record_load_failure(f: &LoadFailure, failures: &mut Vec<RunFailure>, files: &mut FileLedger) {
    failures.push(RunFailure {
        app_id: f.app_id.clone(),
        rel_path: f.rel_path.clone(),
        diagnostic: f.diagnostic.clone(),
    });
    if f.app_id.is_some() && f.files.is_empty() {
        files.failed.push(f.rel_path.clone());
    }
    files
        .failed
        .extend(f.files.iter().map(|r| prefixed(f.app_id.as_deref(), r)));
}

/// Sorts by app id so float aggregation is order-independent, then writes
/// `metrics.json`, `cost_time.csv` and, with labels, `taxonomy.csv`.
fn write_metrics(out: &Path, mut summaries: Vec<AppSummary>, labelled: bool) -> Result<MetricsSummary, PipelineError> {
    summaries.sort_by(|a, b| a.app_id.cmp(&b.app_id));
    let metrics = aggregate_metrics(&summaries);
    let mut bytes = serde_json::to_vec_pretty(&metrics).expect("serializable");
    bytes.push(b'\n');
    write_file(&out.join(METRICS_FILE), &bytes)?;
    write_file(&out.join(COST_TIME_FILE), cost_time_csv(&cost_time_summary(&summaries)).as_bytes())?;
    let taxonomy_path = out.join(TAXONOMY_FILE);
    if labelled {
        write_file(&taxonomy_path, taxonomy_csv(&metrics).as_bytes())?;
    } else if taxonomy_path.exists() {
        std::fs::remove_file(&taxonomy_path).map_err(io_err(&taxonomy_path))?;
    }
    Ok(metrics)
}

/// `group,category,count,proportion`; one block for the total, then one
/// per typology.
pub fn taxonomy_csv(metrics: &MetricsSummary) -> String {
    let mut out = String::from("group,category,count,proportion\n");
    let mut block = |group: &str, counts: &TaxonomyCounts| {
        let n = counts.labeled();
        for (name, c) in [
            ("correct", counts.correct),
            ("minor_error", counts.minor_error),
            ("false_positive", counts.false_positive),
            ("false_negative", counts.false_negative),
            ("reading_error", counts.reading_error),
        ] {
            let p = if n == 0 { 0.0 } else { c as f64 / n as f64 };
            out.push_str(&format!("{group},{name},{c},{p:.4}\n"));
        }
    };
    if let Some(t) = &metrics.total.taxonomy {
        block("total", &t.counts);
    }
    for (typ, g) in &metrics.by_typology {
        if let Some(t) = &g.taxonomy {
            block(&format!("typology {typ}"), &t.counts);
        }
    }
    out
}

/// One application's outputs as read back from disk.
pub struct StoredApp {
    pub app_id: String,
    pub typology: TypologyId,
    pub outcomes: ReportOutcomes,
    pub docs: Vec<ExtractedDocument>,
    pub reports: Vec<ReportDocument>,
}

fn read_json_file(path: &Path) -> Result<Vec<u8>, PipelineError> {
    std::fs::read(path).map_err(io_err(path))
}

pub fn read_app_outputs(dir: &Path) -> Result<StoredApp, PipelineError> {
    let bad = |path: &Path, problem: String| PipelineError::BadOutput {
        path: path.to_path_buf(),
        problem,
    };
    let mut outcomes = ReportOutcomes::new();
    let mut reports = Vec::new();
    let mut identity: Option<(String, TypologyId)> = None;
    for kind in ReportKind::ALL {
        let path = dir.join(format!("{}.json", kind.as_str()));
        let report = parse_report_json(&read_json_file(&path)?).map_err(|e| bad(&path, e.to_string()))?;
        if report.kind != kind {
            return Err(bad(&path, format!("report kind {}", report.kind.as_str())));
        }
        match &identity {
            None => identity = Some((report.app_id.clone(), report.typology.clone())),
            Some((a, t)) if *a != report.app_id || *t != report.typology => {
                return Err(bad(&path, "reports disagree on application".into()));
            }
            Some(_) => {}
        }
        outcomes.insert(kind, report.outcomes.clone());
        reports.push(report);
    }
    let path = dir.join(EXTRACTION_FILE);
    let docs: Vec<ExtractedDocument> =
        serde_json::from_slice(&read_json_file(&path)?).map_err(|e| bad(&path, e.to_string()))?;
    let (app_id, typology) = identity.expect("three reports read");
    Ok(StoredApp {
        app_id,
        typology,
        outcomes,
        docs,
        reports,
    })
}

/// Application directories under `out` holding verify outputs, sorted.
pub fn output_app_dirs(out: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    let mut dirs = Vec::new();
    for entry in std::fs::read_dir(out).map_err(io_err(out))? {
        let entry = entry.map_err(io_err(out))?;
        let path = entry.path();
        if path.is_dir() && path.join(format!("{}.json", ReportKind::Eligibility.as_str())).is_file() {
            dirs.push(path);
        }
    }
    dirs.sort();
    Ok(dirs)
}

/// Recomputes metrics from verify outputs, optionally against labels.
pub fn run_metrics(out: &Path, labels: Option<&Path>) -> Result<MetricsSummary, PipelineError> {
    if !out.is_dir() {
        return Err(PipelineError::MissingOutputs(out.to_path_buf()));
    }
    let dirs = output_app_dirs(out)?;
    if dirs.is_empty() {
        return Err(PipelineError::MissingOutputs(out.to_path_buf()));
    }
    let apps = dirs
        .par_iter()
        .map(|d| read_app_outputs(d))
        .collect::<Result<Vec<_>, _>>()?;

    let labels = match labels {
        Some(path) => {
            let file = std::fs::File::open(path).map_err(io_err(path))?;
            let labels = Labels::from_csv(std::io::BufReader::new(file))?;
            let known: BTreeMap<String, BTreeSet<String>> = apps
                .iter()
                .map(|a| {
                    (
                        a.app_id.clone(),
                        a.outcomes.values().flatten().map(|o| o.check_id.clone()).collect(),
                    )
                })
                .collect();
            labels.check_known(&known)?;
            Some(labels)
        }
        None => None,
    };

    let summaries: Vec<AppSummary> = apps
        .iter()
        .map(|a| {
            let s = AppSummary::new(&a.app_id, &a.typology, &a.outcomes, &a.docs);
            match &labels {
                Some(l) => s.with_labels(&a.outcomes, l),
                None => s,
            }
        })
        .collect();
    write_metrics(out, summaries, labels.is_some())
}

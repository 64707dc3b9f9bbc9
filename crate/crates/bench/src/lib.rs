//! Shared fixtures for the criterion benches.

use reclaim_core::extract::{ExtractedDocument, MemoryFixtures, MockBackend};
use reclaim_core::ingest::{ApplicationBundle, FormatPolicy};
use reclaim_core::pipeline::run_application;
use reclaim_core::rules::{Catalog, EvalParams};
use reclaim_core::synth::{generate, Corpus, GenConfig};

pub fn corpus(n_apps: usize, seed: u64) -> Corpus {
    let cfg = GenConfig {
        seed,
        n_apps,
        ..GenConfig::default()
    };
    generate(&cfg, &Catalog::builtin()).expect("valid generator config")
}

/// Bundles with their extractions, ready for rule evaluation.
pub fn extracted(corpus: &Corpus) -> Vec<(ApplicationBundle, Vec<ExtractedDocument>)> {
    let catalog = Catalog::builtin();
    let params = EvalParams::from_catalog(&catalog);
    corpus
        .apps
        .iter()
        .map(|app| {
            let (bundle, fixtures): (ApplicationBundle, MemoryFixtures) =
                app.materialize(&FormatPolicy::default()).expect("materializes");
            let backend = MockBackend::new(Box::new(fixtures));
            let run = run_application(bundle, &backend, &catalog, &params);
            (run.bundle, run.docs)
        })
        .collect()
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use reclaim_core::extract::MockBackend;
use reclaim_core::ingest::FormatPolicy;
use reclaim_core::pipeline::run_application;
use reclaim_core::rules::{Catalog, CheckStatus, EvalParams};
use reclaim_core::synth::{generate, FaultKind, GenConfig};

const BATCHES: u64 = 20;
const PER_BATCH: usize = 500;

pub fn run() -> Result<String, String> {
    let catalog = Catalog::builtin();
    let params = EvalParams::from_catalog(&catalog);
    let policy = FormatPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut apps, mut real_errors, mut violations) = (0usize, 0usize, Vec::new());
    for batch in 0..BATCHES {
        let cfg = GenConfig {
            seed: 10_000 + batch,
            n_apps: PER_BATCH,
            consistency_rate: rng.gen_range(0.3..0.95),
            unsupported_rate: rng.gen_range(0.0..0.15),
            reading_error_rate: rng.gen_range(0.0..0.1),
            ..GenConfig::default()
        };
        let corpus = generate(&cfg, &catalog)?;
        let found: Vec<(usize, Vec<String>)> = corpus
            .apps
            .par_iter()
            .map(|app| {
                let (bundle, fixtures) = app.materialize(&policy).expect("materializes");
                let run = run_application(bundle, &MockBackend::new(Box::new(fixtures)), &catalog, &params);
                // A real error comes from a discrepancy or omission on a compared operand.
                let injected: Vec<&str> = app
                    .faults
                    .iter()
                    .filter(|f| matches!(f.kind, FaultKind::Discrepancy | FaultKind::Missing))
                    .flat_map(|f| f.checks.iter().map(String::as_str))
                    .collect();
                let mut n_real = 0;
                let mut bad = Vec::new();
                for o in run.outcomes.values().flatten() {
                    let Some(label) = app.labels.get(&o.check_id) else { continue };
                    if !label.real_error {
                        continue;
                    }
                    n_real += 1;
                    if !injected.contains(&o.check_id.as_str()) {
                        bad.push(format!("{} {} labelled real_error without an injected fault", app.app_id, o.check_id));
                    }
                    if o.status == CheckStatus::AutoVerified {
                        bad.push(format!("{} {} auto_verified", app.app_id, o.check_id));
                    }
                }
                (n_real, bad)
            })
            .collect();
        apps += corpus.apps.len();
        for (n, bad) in found {
            real_errors += n;
            violations.extend(bad);
        }
    }
    if let Some(first) = violations.first() {
        return Err(format!("{} violations, first: {first}", violations.len()));
    }
    if real_errors == 0 {
        return Err("no real errors were injected".into());
    }
    Ok(format!("{apps} apps, {real_errors} real-error outcomes, 0 auto_verified"))
}

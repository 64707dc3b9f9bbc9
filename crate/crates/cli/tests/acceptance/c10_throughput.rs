use std::time::{Duration, Instant};

use reclaim_core::pipeline::Manifest;

use crate::common::{expect, path, reclaim};

const APPS: usize = 1000;
const BUDGET: Duration = Duration::from_secs(300);

pub fn run() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let out = tmp.path().join("out");
    reclaim(&["gen-corpus", "--n", &APPS.to_string(), "--seed", "13", "--out", path(&gen)])?;

    let start = Instant::now();
    reclaim(&["verify", "--corpus", path(&gen.join("apps")), "--out", path(&out), "--parallelism", "8"])?;
    let took = start.elapsed();

    let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let c = &manifest.counts;
    expect(c.processed == APPS, || format!("processed {} of {APPS}", c.processed))?;
    expect(c.documents + c.unsupported_documents == APPS * 11, || {
        format!("{} documents + {} unsupported", c.documents, c.unsupported_documents)
    })?;
    expect(took < BUDGET, || format!("took {took:.1?}, budget {BUDGET:?}"))?;
    Ok(format!("{APPS} applications in {:.1}s at parallelism 8", took.as_secs_f64()))
}

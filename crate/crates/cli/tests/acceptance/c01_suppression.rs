use std::time::Instant;

use crate::common::{expect, path, read_json, reclaim};

pub fn run() -> Result<String, String> {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let out = tmp.path().join("out");
    let apps = gen.join("apps");
    reclaim(&["gen-corpus", "--n", "200", "--consistency", "0.76", "--seed", "7", "--out", path(&gen)])?;
    let code = reclaim(&["verify", "--backend", "mock", "--corpus", path(&apps), "--out", path(&out)])?;
    expect(code == 0, || format!("verify exited {code}"))?;
    reclaim(&["metrics", "--out", path(&out)])?;

    let metrics = read_json(&out.join("metrics.json"))?;
    let rate = metrics["total"]["suppression_rate"]
        .as_f64()
        .ok_or("metrics.json lacks total.suppression_rate")?;
    let apps_seen = metrics["total"]["applications"].as_u64().unwrap_or(0);
    let secs = start.elapsed().as_secs_f64();
    expect(apps_seen == 200, || format!("{apps_seen} applications in metrics"))?;
    expect((rate - 0.76).abs() <= 0.02, || format!("suppression {rate:.4}"))?;
    expect(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("suppression {rate:.4} over {apps_seen} apps"))
}

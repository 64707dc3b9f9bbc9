use reclaim_core::pipeline::{output_app_dirs, read_app_outputs};
use reclaim_core::rules::CheckStatus;

use crate::common::{expect, path, read_json, reclaim};

// Target label mix over 1000 labelled checks.
const CORRECT: usize = 880;
const MINOR: usize = 60;
const FALSE_POS: usize = 10;
const FALSE_NEG: usize = 20;
const READING: usize = 30;

#[derive(Default)]
struct Pools {
    auto: Vec<(String, String)>,
    manual: Vec<(String, String)>,
    unreadable: Vec<(String, String)>,
}

pub fn run() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let out = tmp.path().join("out");
    reclaim(&[
        "gen-corpus", "--n", "120", "--seed", "11", "--consistency", "0.7", "--reading-error-rate", "0.05",
        "--out", path(&gen),
    ])?;
    reclaim(&["verify", "--corpus", path(&gen.join("apps")), "--out", path(&out), "--no-html"])?;

    let mut pools = Pools::default();
    for dir in output_app_dirs(&out).map_err(|e| e.to_string())? {
        let app = read_app_outputs(&dir).map_err(|e| e.to_string())?;
        for o in app.outcomes.values().flatten() {
            let key = (app.app_id.clone(), o.check_id.clone());
            if o.evidence.any_unreadable() {
                pools.unreadable.push(key);
            } else if o.status == CheckStatus::AutoVerified {
                pools.auto.push(key);
            } else if o.status == CheckStatus::ManualCheck {
                pools.manual.push(key);
            }
        }
    }
    let manual_needed = MINOR + FALSE_NEG + 1;
    expect(pools.unreadable.len() >= READING, || format!("only {} unreadable outcomes", pools.unreadable.len()))?;
    expect(pools.manual.len() >= manual_needed, || format!("only {} manual outcomes", pools.manual.len()))?;
    expect(pools.auto.len() + pools.manual.len() >= CORRECT + FALSE_POS + MINOR + FALSE_NEG, || {
        "too few decided outcomes".into()
    })?;

    let mut rows = Vec::new();
    let mut auto = pools.auto.into_iter();
    let mut manual = pools.manual.into_iter();
    for (a, c) in pools.unreadable.into_iter().take(READING) {
        rows.push(format!("{a},{c},true,"));
    }
    for (a, c) in manual.by_ref().take(MINOR) {
        rows.push(format!("{a},{c},true,minor"));
    }
    for (a, c) in manual.by_ref().take(FALSE_NEG) {
        rows.push(format!("{a},{c},false,"));
    }
    for (a, c) in auto.by_ref().take(FALSE_POS) {
        rows.push(format!("{a},{c},true,"));
    }
    // Correct: reviewers agree with the system.
    let mut correct = 0;
    for ((a, c), e) in manual.by_ref().map(|k| (k, true)).chain(auto.by_ref().map(|k| (k, false))) {
        if correct == CORRECT {
            break;
        }
        rows.push(format!("{a},{c},{e},"));
        correct += 1;
    }
    expect(correct == CORRECT, || format!("only {correct} correct labels"))?;

    let labels = tmp.path().join("labels.csv");
    let csv = format!("app_id,check_id,real_error,category\n{}\n", rows.join("\n"));
    std::fs::write(&labels, csv).map_err(|e| e.to_string())?;
    reclaim(&["metrics", "--out", path(&out), "--labels", path(&labels)])?;

    let metrics = read_json(&out.join("metrics.json"))?;
    let t = &metrics["total"]["taxonomy"];
    let want = [
        ("correct", CORRECT),
        ("minor_error", MINOR),
        ("false_positive", FALSE_POS),
        ("false_negative", FALSE_NEG),
        ("reading_error", READING),
    ];
    for (name, n) in want {
        expect(t[name].as_u64() == Some(n as u64), || format!("{name}: {} want {n}", t[name]))?;
    }
    expect(t["labeled"].as_u64() == Some(1000), || format!("labeled {}", t["labeled"]))?;

    let table = std::fs::read_to_string(out.join("taxonomy.csv")).map_err(|e| e.to_string())?;
    for (name, n) in want {
        let line = format!("total,{name},{n},{:.4}", n as f64 / 1000.0);
        expect(table.lines().any(|l| l == line), || format!("taxonomy.csv lacks `{line}`"))?;
    }
    Ok("1000 labels: 88% correct, 6% minor, 1% FP, 2% FN, 3% reading".into())
}

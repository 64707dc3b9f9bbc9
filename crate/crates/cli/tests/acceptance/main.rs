//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p reclaim-cli --test acceptance`; pass a criterion
//! number (e.g. `-- 7`) to run only that one.

mod common;
mod c01_suppression;
mod c02_soundness;
mod c03_oracle;
mod c04_determinism;
mod c05_unsupported;
mod c06_cost_table;
mod c07_text_metrics;
mod c08_taxonomy;
mod c09_interchangeable;
mod c10_throughput;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Check = fn() -> Result<String, String>;

const CRITERIA: [(u8, &str, Check); 10] = [
    (1, "suppression rate", c01_suppression::run),
    (2, "fail-safe soundness", c02_soundness::run),
    (3, "rule-engine oracle equivalence", c03_oracle::run),
    (4, "determinism", c04_determinism::run),
    (5, "unsupported-file policy", c05_unsupported::run),
    (6, "cost/time table", c06_cost_table::run),
    (7, "text metrics", c07_text_metrics::run),
    (8, "error taxonomy", c08_taxonomy::run),
    (9, "backend interchangeability", c09_interchangeable::run),
    (10, "desk-scale throughput", c10_throughput::run),
];

fn main() {
    let only: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, check) in CRITERIA {
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {n:>2} {name}: PASS ({detail}; {secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} {name}: FAIL ({why}; {secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

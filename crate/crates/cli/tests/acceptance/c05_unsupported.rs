use std::collections::{BTreeMap, BTreeSet};

use reclaim_core::ingest::DocumentSlot;
use reclaim_core::pipeline::{output_app_dirs, read_app_outputs, Manifest};
use reclaim_core::rules::{Catalog, CheckStatus, Selector};

use crate::common::{expect, path, reclaim};

const APPS: usize = 100;
const DOCS_PER_APP: usize = 11;

pub fn run() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let out = tmp.path().join("out");
    reclaim(&["gen-corpus", "--n", &APPS.to_string(), "--seed", "5", "--unsupported-rate", "0.1", "--out", path(&gen)])?;
    reclaim(&["verify", "--corpus", path(&gen.join("apps")), "--out", path(&out)])?;

    let expected = APPS * DOCS_PER_APP / 10;
    let manifest: Manifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    expect(manifest.files.unsupported.len() == expected, || {
        format!("manifest lists {} unsupported files, want {expected}", manifest.files.unsupported.len())
    })?;

    let catalog = Catalog::builtin();
    let mut notices = 0;
    let mut dependent = 0;
    for dir in output_app_dirs(&out).map_err(|e| e.to_string())? {
        let app = read_app_outputs(&dir).map_err(|e| e.to_string())?;
        let listed: Vec<BTreeSet<&str>> = app
            .reports
            .iter()
            .map(|r| r.unsupported_notices.iter().map(|n| n.rel_path.as_str()).collect())
            .collect();
        expect(listed.windows(2).all(|w| w[0] == w[1]), || format!("{}: reports list different notices", app.app_id))?;
        notices += listed[0].len();

        // Slots whose every file is unsupported.
        let readable: BTreeSet<DocumentSlot> = app.docs.iter().map(|d| d.doc.slot).collect();
        let mut blocked: BTreeMap<DocumentSlot, usize> = BTreeMap::new();
        for n in &app.reports[0].unsupported_notices {
            *blocked.entry(n.slot).or_default() += 1;
        }
        blocked.retain(|slot, _| !readable.contains(slot));

        for o in app.outcomes.values().flatten() {
            let def = catalog.check(&o.check_id).ok_or_else(|| format!("unknown check {}", o.check_id))?;
            let mut operands: Vec<&Selector> = def.selectors().collect();
            operands.extend(def.when.as_ref().map(|c| c.operand()));
            let solely = operands
                .iter()
                .all(|s| matches!(s, Selector::Doc { doc, .. } if blocked.contains_key(doc)));
            if solely {
                dependent += 1;
                expect(o.status == CheckStatus::Unsupported, || {
                    format!("{} {} depends only on unsupported files but is {:?}", app.app_id, o.check_id, o.status)
                })?;
            }
        }
    }
    expect(notices == expected, || format!("{notices} notices in reports, want {expected}"))?;
    expect(dependent > 0, || "no check depended solely on unsupported files".into())?;
    Ok(format!("{notices} notices = floor(10% of {}), {dependent} dependent checks unsupported", APPS * DOCS_PER_APP))
}

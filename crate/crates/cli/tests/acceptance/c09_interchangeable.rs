use reclaim_core::extract::stub::{StubIndex, StubOptions, StubServer};
use reclaim_core::ingest::FormatPolicy;
use reclaim_core::pipeline::{output_app_dirs, read_app_outputs};

use crate::common::{expect, path, reclaim};

const REPORTS: [&str; 3] = ["eligibility.json", "common_core.json", "typology.json"];

pub fn run() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let apps = gen.join("apps");
    let (mock_out, remote_out) = (tmp.path().join("mock"), tmp.path().join("remote"));
    reclaim(&["gen-corpus", "--n", "50", "--seed", "9", "--out", path(&gen)])?;

    let index = StubIndex::from_corpus(&apps, &FormatPolicy::default()).map_err(|e| e.to_string())?;
    let server = StubServer::start(index, StubOptions::default()).map_err(|e| e.to_string())?;
    reclaim(&["verify", "--corpus", path(&apps), "--out", path(&mock_out), "--no-html"])?;
    reclaim(&[
        "verify", "--corpus", path(&apps), "--out", path(&remote_out), "--no-html",
        "--backend", "remote", "--endpoint", server.url().as_str(),
    ])?;
    expect(server.request_count() > 0, || "remote backend never called the stub".into())?;

    let mut docs = 0;
    let dirs = output_app_dirs(&mock_out).map_err(|e| e.to_string())?;
    expect(dirs.len() == 50, || format!("{} app outputs", dirs.len()))?;
    for dir in dirs {
        let name = dir.file_name().ok_or("bad dir")?;
        let twin = remote_out.join(name);
        let a = read_app_outputs(&dir).map_err(|e| e.to_string())?;
        let b = read_app_outputs(&twin).map_err(|e| e.to_string())?;
        expect(a.docs.len() == b.docs.len(), || format!("{}: document counts differ", a.app_id))?;
        for (x, y) in a.docs.iter().zip(&b.docs) {
            expect(x.doc == y.doc && x.doc_class == y.doc_class && x.fields == y.fields, || {
                format!("{} {}: extraction differs", a.app_id, x.doc.rel_path)
            })?;
            docs += 1;
        }
        for r in REPORTS {
            let (x, y) = (std::fs::read(dir.join(r)), std::fs::read(twin.join(r)));
            expect(matches!((&x, &y), (Ok(x), Ok(y)) if x == y), || format!("{}: {r} differs", a.app_id))?;
        }
    }
    Ok(format!("{docs} documents and 150 reports identical across mock and HTTP backends"))
}

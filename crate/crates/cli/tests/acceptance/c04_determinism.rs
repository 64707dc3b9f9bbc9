use crate::common::{expect, json_hashes, path, reclaim};

pub fn run() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gen = tmp.path().join("gen");
    let out = tmp.path().join("out");
    reclaim(&[
        "gen-corpus", "--n", "60", "--seed", "7", "--unsupported-rate", "0.1", "--reading-error-rate", "0.05", "--out",
        path(&gen),
    ])?;
    let verify = || reclaim(&["verify", "--seed", "7", "--parallelism", "8", "--corpus", path(&gen.join("apps")), "--out", path(&out)]);

    verify()?;
    let first = json_hashes(&out);
    std::fs::remove_dir_all(&out).map_err(|e| e.to_string())?;
    verify()?;
    let second = json_hashes(&out);

    expect(first.len() > 60 * 4, || format!("only {} JSON files", first.len()))?;
    expect(first.keys().eq(second.keys()), || "file sets differ".into())?;
    if let Some((k, _)) = first.iter().find(|(k, h)| second[*k] != **h) {
        return Err(format!("{} differs", k.display()));
    }
    Ok(format!("{} JSON files byte-identical across runs", first.len()))
}

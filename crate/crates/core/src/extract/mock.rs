//! Fixture-backed extraction: each document may carry a
//! `<file>.fields.json` sidecar mapping tags to the strings a model would
//! have produced.
//!
//! Sidecar keys starting with `__` are control entries:
//! `"__faults__": ["drop:tag", "corrupt:tag", "fail"]` and
//! `"__meta__": {"cost_eur": 0.01, "elapsed_ms": 1200}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BackendError, ExtractionBackend, ExtractionSchema, RawExtraction, NONE_SENTINEL};
use crate::ingest::{read_sidecar_bytes, DocumentRef};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fault {
    /// Answer `None` for the tag.
    Drop(String),
    /// Alter one digit of the tag's value.
    Corrupt(String),
    /// Fail the whole call.
    Fail,
}

impl Fault {
    fn parse(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "fail" => Ok(Fault::Fail),
            Some(("drop", tag)) => Ok(Fault::Drop(tag.to_string())),
            Some(("corrupt", tag)) => Ok(Fault::Corrupt(tag.to_string())),
            _ => Err(format!("unknown fault {s:?}")),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Fault::Drop(t) => format!("drop:{t}"),
            Fault::Corrupt(t) => format!("corrupt:{t}"),
            Fault::Fail => "fail".to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SidecarMeta {
    #[serde(default)]
    pub cost_eur: f64,
    #[serde(default)]
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sidecar {
    pub fields: BTreeMap<String, String>,
    pub faults: Vec<Fault>,
    pub meta: SidecarMeta,
}

impl Sidecar {
    pub fn from_json(v: &serde_json::Value) -> Result<Self, String> {
        let obj = v.as_object().ok_or("sidecar must be a JSON object")?;
        let mut out = Sidecar::default();
        for (k, val) in obj {
            match k.as_str() {
                "__faults__" => {
                    let list = val.as_array().ok_or("__faults__ must be an array")?;
                    for f in list {
                        out.faults.push(Fault::parse(f.as_str().ok_or("fault entries must be strings")?)?);
                    }
                }
                "__meta__" => {
                    out.meta = serde_json::from_value(val.clone()).map_err(|e| format!("__meta__: {e}"))?;
                }
                _ if k.starts_with("__") => return Err(format!("unknown control key {k}")),
                _ => {
                    let s = match val {
                        serde_json::Value::String(s) => s.clone(),
                        serde_json::Value::Null => NONE_SENTINEL.to_string(),
                        other => other.to_string(),
                    };
                    out.fields.insert(k.clone(), s);
                }
            }
        }
        Ok(out)
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        let v: serde_json::Value = serde_json::from_slice(bytes).map_err(|e| e.to_string())?;
        Self::from_json(&v)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::Map::new();
        for (k, v) in &self.fields {
            obj.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        if !self.faults.is_empty() {
            obj.insert(
                "__faults__".into(),
                self.faults.iter().map(|f| serde_json::Value::String(f.render())).collect(),
            );
        }
        obj.insert("__meta__".into(), serde_json::to_value(&self.meta).expect("plain struct"));
        serde_json::Value::Object(obj)
    }

    /// Answers `tags` with faults applied. Tags the sidecar lacks are `None`.
    pub fn answer<'a>(&self, tags: impl IntoIterator<Item = &'a str>) -> Result<RawExtraction, BackendError> {
        if self.faults.contains(&Fault::Fail) {
            return Err(BackendError::Injected);
        }
        let mut fields = BTreeMap::new();
        for tag in tags {
            let mut value = self.fields.get(tag).cloned().unwrap_or_else(|| NONE_SENTINEL.to_string());
            for fault in &self.faults {
                match fault {
                    Fault::Drop(t) if t == tag => value = NONE_SENTINEL.to_string(),
                    Fault::Corrupt(t) if t == tag => value = corrupt_value(&value),
                    _ => {}
                }
            }
            fields.insert(tag.to_string(), value);
        }
        Ok(RawExtraction {
            fields,
            cost_eur: self.meta.cost_eur,
            elapsed_ms: self.meta.elapsed_ms,
        })
    }
}

/// Bumps the first ASCII digit (9 wraps to 0); text without digits gets a `~` prefix.
pub fn corrupt_value(value: &str) -> String {
    match value.char_indices().find(|(_, c)| c.is_ascii_digit()) {
        Some((i, c)) => {
            let d = c.to_digit(10).expect("ascii digit");
            let bumped = char::from_digit((d + 1) % 10, 10).expect("digit");
            let mut out = String::with_capacity(value.len());
            out.push_str(&value[..i]);
            out.push(bumped);
            out.push_str(&value[i + 1..]);
            out
        }
        None => format!("~{value}"),
    }
}

pub trait FixtureStore: Send + Sync {
    fn sidecar(&self, doc: &DocumentRef) -> Result<Option<Sidecar>, String>;
}

/// Reads sidecars next to documents on disk or inside their archive.
#[derive(Debug, Default, Clone, Copy)]
pub struct DiskFixtures;

impl FixtureStore for DiskFixtures {
    fn sidecar(&self, doc: &DocumentRef) -> Result<Option<Sidecar>, String> {
        match read_sidecar_bytes(doc).map_err(|e| e.to_string())? {
            Some(bytes) => Sidecar::parse(&bytes).map(Some).map_err(|e| format!("{}: {e}", doc.rel_path)),
            None => Ok(None),
        }
    }
}

/// Sidecars keyed by document `rel_path`.
#[derive(Debug, Default, Clone)]
pub struct MemoryFixtures {
    entries: BTreeMap<String, Sidecar>,
}

impl MemoryFixtures {
    pub fn insert(&mut self, rel_path: &str, sidecar: Sidecar) {
        self.entries.insert(rel_path.to_string(), sidecar);
    }

    pub fn get_mut(&mut self, rel_path: &str) -> Option<&mut Sidecar> {
        self.entries.get_mut(rel_path)
    }
}

impl FixtureStore for MemoryFixtures {
    fn sidecar(&self, doc: &DocumentRef) -> Result<Option<Sidecar>, String> {
        Ok(self.entries.get(&doc.rel_path).cloned())
    }
}

pub fn mock_lookup(
    store: &dyn FixtureStore,
    doc: &DocumentRef,
    schema: &ExtractionSchema,
) -> Result<RawExtraction, BackendError> {
    let sidecar = store.sidecar(doc).map_err(BackendError::Fixture)?.unwrap_or_default();
    sidecar.answer(schema.tags.iter().map(|t| t.name.as_str()))
}

pub struct MockBackend {
    store: Box<dyn FixtureStore>,
}

impl MockBackend {
    pub fn new(store: Box<dyn FixtureStore>) -> Self {
        Self { store }
    }

    pub fn disk() -> Self {
        Self::new(Box::new(DiskFixtures))
    }
}

impl ExtractionBackend for MockBackend {
    fn id(&self) -> String {
        "mock".to_string()
    }

    fn extract_raw(&self, doc: &DocumentRef, schema: &ExtractionSchema) -> Result<RawExtraction, BackendError> {
        mock_lookup(self.store.as_ref(), doc, schema)
    }
}

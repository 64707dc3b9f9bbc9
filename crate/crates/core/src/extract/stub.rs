//! In-process HTTP server speaking the remote extraction contract and
//! answering from corpus fixtures. Documents are recognised by the SHA-256
//! of their bytes, so the server needs no path information from clients.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use base64::Engine;
use sha2::{Digest, Sha256};
use url::Url;

use super::wire::{ExtractRequest, ExtractResponse};
use super::{DiskFixtures, FixtureStore, Sidecar};
use crate::ingest::{load_corpus, read_document_bytes, FormatPolicy, IngestError};

pub type ContentHash = [u8; 32];

pub fn content_hash(bytes: &[u8]) -> ContentHash {
    Sha256::digest(bytes).into()
}

#[derive(Debug, Clone, Default)]
pub struct StubIndex {
    sidecars: BTreeMap<ContentHash, Sidecar>,
}

impl StubIndex {
    pub fn insert(&mut self, bytes: &[u8], sidecar: Sidecar) {
        self.sidecars.entry(content_hash(bytes)).or_insert(sidecar);
    }

    pub fn len(&self) -> usize {
        self.sidecars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sidecars.is_empty()
    }

    /// Indexes every document with a sidecar under `root`.
    pub fn from_corpus(root: &Path, policy: &FormatPolicy) -> Result<Self, IngestError> {
        let scan = load_corpus(root, policy)?;
        let mut index = Self::default();
        for doc in scan.bundles.iter().flat_map(|b| &b.documents) {
            let Ok(Some(sidecar)) = DiskFixtures.sidecar(doc) else {
                continue;
            };
            match read_document_bytes(doc) {
                Ok(bytes) => index.insert(&bytes, sidecar),
                Err(e) => tracing::warn!(doc = %doc.rel_path, error = %e, "stub index skipped document"),
            }
        }
        Ok(index)
    }
}

#[derive(Debug, Clone, Default)]
pub struct StubOptions {
    /// Answer every request with this status instead of fixtures.
    pub force_status: Option<u16>,
    /// Tags left out of every response.
    pub omit_tags: BTreeSet<String>,
    pub workers: usize,
}

pub struct StubServer {
    url: Url,
    stop: Arc<AtomicBool>,
    requests: Arc<AtomicUsize>,
    workers: Vec<JoinHandle<()>>,
}

impl StubServer {
    pub fn start(index: StubIndex, options: StubOptions) -> std::io::Result<Self> {
        let server = tiny_http::Server::http("127.0.0.1:0").map_err(std::io::Error::other)?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| std::io::Error::other("stub bound to a non-IP address"))?;
        let url = Url::parse(&format!("http://{addr}/")).expect("socket address forms a URL");
        let server = Arc::new(server);
        let index = Arc::new(index);
        let options = Arc::new(options);
        let stop = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(AtomicUsize::new(0));
        let workers = (0..options.workers.max(1))
            .map(|_| {
                let (server, index, options, stop, requests) =
                    (server.clone(), index.clone(), options.clone(), stop.clone(), requests.clone());
                std::thread::spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        match server.recv_timeout(Duration::from_millis(20)) {
                            Ok(Some(req)) => {
                                requests.fetch_add(1, Ordering::Relaxed);
                                handle(req, &index, &options);
                            }
                            Ok(None) => {}
                            Err(_) => break,
                        }
                    }
                })
            })
            .collect();
        Ok(Self {
            url,
            stop,
            requests,
            workers,
        })
    }

    pub fn url(&self) -> &Url {
        &self.url
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn respond(req: tiny_http::Request, status: u16, body: String) {
    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").expect("static header");
    let resp = tiny_http::Response::from_string(body)
        .with_status_code(status)
        .with_header(header);
    let _ = req.respond(resp);
}

fn handle(mut req: tiny_http::Request, index: &StubIndex, options: &StubOptions) {
    if let Some(status) = options.force_status {
        return respond(req, status, r#"{"error":"forced"}"#.into());
    }
    if req.method() != &tiny_http::Method::Post || req.url().trim_end_matches('/') != "/extract" {
        return respond(req, 404, r#"{"error":"not found"}"#.into());
    }
    let mut body = String::new();
    if req.as_reader().read_to_string(&mut body).is_err() {
        return respond(req, 400, r#"{"error":"unreadable body"}"#.into());
    }
    let Ok(request) = serde_json::from_str::<ExtractRequest>(&body) else {
        return respond(req, 400, r#"{"error":"bad request"}"#.into());
    };
    let Ok(bytes) = base64::engine::general_purpose::STANDARD.decode(&request.content_b64) else {
        return respond(req, 400, r#"{"error":"bad content_b64"}"#.into());
    };
    let sidecar = index.sidecars.get(&content_hash(&bytes)).cloned().unwrap_or_default();
    match sidecar.answer(request.schema.iter().map(|t| t.name.as_str())) {
        Err(_) => respond(req, 500, r#"{"error":"extraction failed"}"#.into()),
        Ok(mut raw) => {
            raw.fields.retain(|k, _| !options.omit_tags.contains(k));
            let resp = ExtractResponse {
                fields: raw.fields,
                cost_eur: raw.cost_eur,
                elapsed_ms: raw.elapsed_ms,
            };
            respond(req, 200, serde_json::to_string(&resp).expect("response serialises"));
        }
    }
}

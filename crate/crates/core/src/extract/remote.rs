use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine;
use url::Url;

use super::wire::{wire_schema, ExtractRequest, ExtractResponse};
use super::{BackendError, ExtractionBackend, ExtractionSchema, RawExtraction};
use crate::ingest::{read_document_bytes, DocumentRef};

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL; requests go to `<endpoint>/extract`.
    pub endpoint: Url,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub max_attempts: u32,
    /// Delay before the second attempt; doubles afterwards.
    pub backoff: Duration,
    pub max_in_flight: usize,
}

impl RemoteConfig {
    pub fn new(endpoint: Url) -> Self {
        Self {
            endpoint,
            api_key: None,
            timeout: Duration::from_secs(60),
            max_attempts: 3,
            backoff: Duration::from_millis(250),
            max_in_flight: 8,
        }
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("gate poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate poisoned") += 1;
        self.0.cv.notify_one();
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    url: Url,
    agent: ureq::Agent,
    gate: Gate,
}

enum Attempt {
    Retry(BackendError),
    Fatal(BackendError),
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Result<Self, url::ParseError> {
        let mut base = config.endpoint.clone();
        if !base.path().ends_with('/') {
            let p = format!("{}/", base.path());
            base.set_path(&p);
        }
        let url = base.join("extract")?;
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        Ok(Self {
            gate: Gate::new(config.max_in_flight),
            config,
            url,
            agent,
        })
    }

    pub fn url(&self) -> &Url {
        &self.url
    }

    fn attempt(&self, body: &str, attempt_no: u32) -> Result<ExtractResponse, Attempt> {
        let _permit = self.gate.acquire();
        let mut req = self.agent.post(self.url.as_str()).set("Content-Type", "application/json");
        if let Some(key) = &self.config.api_key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        match req.send_string(body) {
            Ok(resp) => {
                let text = resp
                    .into_string()
                    .map_err(|e| Attempt::Retry(BackendError::Transport {
                        attempts: attempt_no,
                        message: e.to_string(),
                    }))?;
                serde_json::from_str(&text).map_err(|e| Attempt::Fatal(BackendError::Malformed(e.to_string())))
            }
            Err(ureq::Error::Status(status, _)) => {
                let err = BackendError::Status {
                    status,
                    attempts: attempt_no,
                };
                if status >= 500 {
                    Err(Attempt::Retry(err))
                } else {
                    Err(Attempt::Fatal(err))
                }
            }
            Err(ureq::Error::Transport(t)) => Err(Attempt::Retry(BackendError::Transport {
                attempts: attempt_no,
                message: t.to_string(),
            })),
        }
    }
}

impl ExtractionBackend for RemoteBackend {
    fn id(&self) -> String {
        format!("remote:{}", self.url)
    }

    fn extract_raw(&self, doc: &DocumentRef, schema: &ExtractionSchema) -> Result<RawExtraction, BackendError> {
        let bytes = read_document_bytes(doc).map_err(|e| BackendError::Io(e.to_string()))?;
        let request = ExtractRequest {
            doc_kind: doc.kind.as_str().to_string(),
            slot: Some(doc.slot.as_str().to_string()),
            schema: wire_schema(schema),
            content_b64: base64::engine::general_purpose::STANDARD.encode(bytes),
        };
        let body = serde_json::to_string(&request).expect("request serialises");
        let started = Instant::now();
        let attempts = self.config.max_attempts.max(1);
        let mut delay = self.config.backoff;
        for n in 1..=attempts {
            match self.attempt(&body, n) {
                Ok(resp) => {
                    tracing::trace!(doc = %doc.rel_path, wall_ms = started.elapsed().as_millis() as u64, "extracted");
                    return Ok(RawExtraction {
                        fields: resp.fields,
                        cost_eur: resp.cost_eur,
                        elapsed_ms: resp.elapsed_ms,
                    });
                }
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Retry(e)) if n == attempts => return Err(e),
                Err(Attempt::Retry(e)) => {
                    tracing::debug!(doc = %doc.rel_path, attempt = n, error = %e, "retrying extraction");
                    std::thread::sleep(delay);
                    delay = delay.saturating_mul(2);
                }
            }
        }
        unreachable!("loop returns on the final attempt")
    }
}

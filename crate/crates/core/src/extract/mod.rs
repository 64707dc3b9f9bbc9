//! Document-to-fields extraction over pluggable backends.
//!
//! A backend answers a fixed tag set per document ([`ExtractionSchema`])
//! with raw strings; this module turns those into typed
//! [`ExtractedValue`]s. The literal `None` means the document lacks the
//! value, which is kept distinct from values that could not be read.

mod mock;
mod remote;
mod schema;
pub mod stub;
pub mod wire;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mock::{corrupt_value, mock_lookup, DiskFixtures, Fault, FixtureStore, MemoryFixtures, MockBackend, Sidecar, SidecarMeta};
pub use remote::{RemoteBackend, RemoteConfig};
pub use schema::{
    schema_for, ExtractionSchema, TagSpec, ValueType, BUILDING_USES, ENERGY_CLASSES, EXPENSE_CATEGORIES, MCP_CATEGORIES,
    PROPERTY_KINDS, YES_NO,
};

use crate::ingest::{DocumentRef, DocumentSlot, FileKind};
use crate::normalize::{parse_date, parse_money, parse_number, parse_power, validate_tax_id, ParseWarning};
use crate::value::TypedValue;

/// The backend's string for "value not in the document".
pub const NONE_SENTINEL: &str = "None";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnreadableReason {
    TypeMismatch,
    BackendError,
    EmptyValue,
}

impl fmt::Display for UnreadableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnreadableReason::TypeMismatch => "type_mismatch",
            UnreadableReason::BackendError => "backend_error",
            UnreadableReason::EmptyValue => "empty_value",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
pub enum ExtractedValue {
    Present {
        value: TypedValue,
        raw: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        warnings: Vec<ParseWarning>,
    },
    Absent,
    Unreadable {
        reason: UnreadableReason,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        raw: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionMeta {
    pub backend_id: String,
    pub elapsed_ms: u64,
    pub cost_eur: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedDocument {
    pub doc: DocumentRef,
    /// MCP category 1..=5 for prior-communication documents.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_class: Option<u8>,
    pub fields: BTreeMap<String, ExtractedValue>,
    pub meta: ExtractionMeta,
}

/// What a backend returns before typing: tag → raw string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawExtraction {
    pub fields: BTreeMap<String, String>,
    pub cost_eur: f64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("injected backend failure")]
    Injected,
    #[error("cannot read document: {0}")]
    Io(String),
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("backend returned HTTP {status} after {attempts} attempt(s)")]
    Status { status: u16, attempts: u32 },
    #[error("malformed backend response: {0}")]
    Malformed(String),
}

/// A source of raw tag values. Implementations must tolerate concurrent calls.
pub trait ExtractionBackend: Send + Sync {
    fn id(&self) -> String;
    fn extract_raw(&self, doc: &DocumentRef, schema: &ExtractionSchema) -> Result<RawExtraction, BackendError>;
}

/// Types one raw tag value according to its declared type.
pub fn parse_tag_value(tag_def: &TagSpec, raw: Option<&str>) -> ExtractedValue {
    let Some(raw) = raw else {
        return ExtractedValue::Absent;
    };
    let text = raw.trim();
    if text == NONE_SENTINEL {
        return ExtractedValue::Absent;
    }
    if text.is_empty() {
        return ExtractedValue::Unreadable {
            reason: UnreadableReason::EmptyValue,
            raw: Some(raw.to_string()),
        };
    }
    let mut warnings = Vec::new();
    let typed: Option<TypedValue> = match &tag_def.value_type {
        ValueType::Text => Some(TypedValue::Text(text.to_string())),
        ValueType::Money => parse_money(text).ok().map(TypedValue::Money),
        ValueType::Date => parse_date(text).ok().map(TypedValue::Date),
        ValueType::Number => parse_number(text).ok().map(TypedValue::Number),
        ValueType::TaxId => validate_tax_id(text).ok().map(TypedValue::TaxId),
        ValueType::Power => parse_power(text).ok().map(|(p, w)| {
            warnings.extend(w);
            TypedValue::Power(p)
        }),
        ValueType::Enum(variants) => variants
            .iter()
            .find(|v| v.eq_ignore_ascii_case(text))
            .map(|v| TypedValue::Enum(v.clone())),
    };
    match typed {
        Some(value) => ExtractedValue::Present {
            value,
            raw: raw.to_string(),
            warnings,
        },
        None => ExtractedValue::Unreadable {
            reason: UnreadableReason::TypeMismatch,
            raw: Some(raw.to_string()),
        },
    }
}

/// Extracts one document. Backend failures mark every tag
/// `unreadable(backend_error)` and never propagate.
pub fn extract(doc: &DocumentRef, schema: &ExtractionSchema, backend: &dyn ExtractionBackend) -> ExtractedDocument {
    debug_assert_ne!(doc.kind, FileKind::Zip, "archives are expanded before extraction");
    let backend_id = backend.id();
    if schema.is_empty() {
        return ExtractedDocument {
            doc: doc.clone(),
            doc_class: None,
            fields: BTreeMap::new(),
            meta: ExtractionMeta {
                backend_id,
                elapsed_ms: 0,
                cost_eur: 0.0,
            },
        };
    }
    let (fields, meta) = match backend.extract_raw(doc, schema) {
        Ok(raw) => {
            let fields = schema
                .tags
                .iter()
                .map(|tag_def| (tag_def.name.clone(), parse_tag_value(tag_def, raw.fields.get(&tag_def.name).map(String::as_str))))
                .collect();
            (
                fields,
                ExtractionMeta {
                    backend_id,
                    elapsed_ms: raw.elapsed_ms,
                    cost_eur: raw.cost_eur,
                },
            )
        }
        Err(e) => {
            tracing::warn!(doc = %doc.rel_path, error = %e, "extraction failed");
            let fields = schema
                .tags
                .iter()
                .map(|tag_def| {
                    (
                        tag_def.name.clone(),
                        ExtractedValue::Unreadable {
                            reason: UnreadableReason::BackendError,
                            raw: None,
                        },
                    )
                })
                .collect();
            (
                fields,
                ExtractionMeta {
                    backend_id,
                    elapsed_ms: 0,
                    cost_eur: 0.0,
                },
            )
        }
    };
    let mut out = ExtractedDocument {
        doc: doc.clone(),
        doc_class: None,
        fields,
        meta,
    };
    if doc.slot == DocumentSlot::PriorCommunication {
        out.doc_class = classify_mcp(&out);
    }
    out
}

/// MCP category from the `mcp_type` tag; anything but a valid 1..=5 is `None`.
pub fn classify_mcp(extracted: &ExtractedDocument) -> Option<u8> {
    match extracted.fields.get("mcp_type") {
        Some(ExtractedValue::Present {
            value: TypedValue::Enum(v),
            ..
        }) => v.parse().ok().filter(|c| (1..=5).contains(c)),
        _ => None,
    }
}

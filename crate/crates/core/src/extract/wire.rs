//! JSON bodies of the remote extraction contract (`POST /extract`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ExtractionSchema, ValueType};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireTag {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractRequest {
    /// File kind of the payload (`pdf`, `jpg`, `png`).
    pub doc_kind: String,
    /// Document slot the tags belong to; informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<String>,
    pub schema: Vec<WireTag>,
    pub content_b64: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractResponse {
    pub fields: BTreeMap<String, String>,
    pub cost_eur: f64,
    pub elapsed_ms: u64,
}

pub fn wire_schema(schema: &ExtractionSchema) -> Vec<WireTag> {
    schema
        .tags
        .iter()
        .map(|t| WireTag {
            name: t.name.clone(),
            value_type: t.value_type.as_str().to_string(),
            variants: match &t.value_type {
                ValueType::Enum(v) => Some(v.clone()),
                _ => None,
            },
        })
        .collect()
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{parse_date, parse_money, parse_number, validate_tax_id};
use crate::typology::TypologyId;
use crate::value::TypedValue;

/// One declared form value. A value that failed to parse is kept as text
/// with `warning` set so the rule engine can flag it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredField {
    pub value: TypedValue,
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Applicant-declared fields keyed by field id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FormData {
    pub declared: BTreeMap<String, DeclaredField>,
}

impl FormData {
    pub fn get(&self, field_id: &str) -> Option<&DeclaredField> {
        self.declared.get(field_id)
    }
}

/// Root attributes plus declared data of a `form.xml`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormXml {
    pub app_id: String,
    pub typology: TypologyId,
    pub form: FormData,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("form.xml is not well-formed: {0}")]
    Xml(String),
    #[error("form.xml root must be <application>, found <{0}>")]
    Root(String),
    #[error("form.xml <application> lacks the {0:?} attribute")]
    MissingAttribute(&'static str),
    #[error("form.xml: {0}")]
    Typology(String),
    #[error("form.xml has no <declared> element")]
    MissingDeclared,
    #[error("form.xml declares field {0:?} more than once")]
    DuplicateField(String),
}

/// The `type` attribute of a declared element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeclaredType {
    Text,
    Money,
    Date,
    Number,
    TaxId,
}

impl DeclaredType {
    pub fn as_str(&self) -> &'static str {
        match self {
            DeclaredType::Text => "text",
            DeclaredType::Money => "money",
            DeclaredType::Date => "date",
            DeclaredType::Number => "number",
            DeclaredType::TaxId => "tax_id",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "text" => DeclaredType::Text,
            "money" => DeclaredType::Money,
            "date" => DeclaredType::Date,
            "number" => DeclaredType::Number,
            "tax_id" => DeclaredType::TaxId,
            _ => return None,
        })
    }
}

/// Declared type of each known form field.
pub fn form_field_type(field_id: &str) -> Option<DeclaredType> {
    Some(match field_id {
        "applicant_name" | "property_address" | "property_type" | "property_article" | "invoice_number"
        | "equipment_type" | "energy_source" => DeclaredType::Text,
        "applicant_tax_id" | "company_tax_id" => DeclaredType::TaxId,
        "invoice_value" => DeclaredType::Money,
        "submission_date" => DeclaredType::Date,
        "gross_area" | "window_area" | "insulated_area" | "peak_power" | "inverter_power" | "battery_power"
        | "panel_count" | "battery_count" => DeclaredType::Number,
        _ => return None,
    })
}

pub fn parse_declared(kind: DeclaredType, raw: &str) -> DeclaredField {
    let text = raw.trim();
    let parsed: Result<TypedValue, String> = match kind {
        DeclaredType::Text => Ok(TypedValue::Text(text.to_string())),
        DeclaredType::Money => parse_money(text).map(TypedValue::Money).map_err(|e| e.to_string()),
        DeclaredType::Date => parse_date(text).map(TypedValue::Date).map_err(|e| e.to_string()),
        DeclaredType::Number => parse_number(text).map(TypedValue::Number).map_err(|e| e.to_string()),
        DeclaredType::TaxId => validate_tax_id(text).map(TypedValue::TaxId).map_err(|e| e.to_string()),
    };
    match parsed {
        Ok(value) => DeclaredField {
            value,
            raw: raw.to_string(),
            warning: None,
        },
        Err(e) => DeclaredField {
            value: TypedValue::Text(text.to_string()),
            raw: raw.to_string(),
            warning: Some(format!("declared {} value did not parse: {e}", kind.as_str())),
        },
    }
}

/// Reads `<application id=".." typology="..."><declared>...</declared></application>`.
pub fn parse_form_xml(bytes: &[u8]) -> Result<FormXml, FormError> {
    let text = std::str::from_utf8(bytes).map_err(|e| FormError::Xml(e.to_string()))?;
    let doc = roxmltree::Document::parse(text).map_err(|e| FormError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "application" {
        return Err(FormError::Root(root.tag_name().name().to_string()));
    }
    let app_id = root
        .attribute("id")
        .filter(|s| !s.trim().is_empty())
        .ok_or(FormError::MissingAttribute("id"))?
        .trim()
        .to_string();
    let typology: TypologyId = root
        .attribute("typology")
        .ok_or(FormError::MissingAttribute("typology"))?
        .parse()
        .map_err(|e: crate::typology::UnknownTypology| FormError::Typology(e.to_string()))?;
    let declared_el = root
        .children()
        .find(|n| n.is_element() && n.tag_name().name() == "declared")
        .ok_or(FormError::MissingDeclared)?;

    let mut declared = BTreeMap::new();
    for el in declared_el.children().filter(|n| n.is_element()) {
        let field_id = el.tag_name().name().to_string();
        if declared.contains_key(&field_id) {
            return Err(FormError::DuplicateField(field_id));
        }
        let raw: String = el
            .descendants()
            .filter(|n| n.is_text())
            .filter_map(|n| n.text())
            .collect();
        let type_attr = el.attribute("type").unwrap_or("text");
        let field = match DeclaredType::parse(type_attr) {
            Some(kind) => parse_declared(kind, &raw),
            None => DeclaredField {
                value: TypedValue::Text(raw.trim().to_string()),
                raw: raw.clone(),
                warning: Some(format!("unknown declared type {type_attr:?}")),
            },
        };
        declared.insert(field_id, field);
    }
    Ok(FormXml {
        app_id,
        typology,
        form: FormData { declared },
    })
}

/// Writes a `form.xml` that [`parse_form_xml`] reads back.
pub fn render_form_xml(app_id: &str, typology: &TypologyId, fields: &[(String, DeclaredType, String)]) -> String {
    use html_escape::{encode_double_quoted_attribute, encode_text};
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<application id=\"{}\" typology=\"{}\">\n  <declared>\n",
        encode_double_quoted_attribute(app_id),
        typology
    ));
    for (name, kind, raw) in fields {
        out.push_str(&format!(
            "    <{name} type=\"{}\">{}</{name}>\n",
            kind.as_str(),
            encode_text(raw)
        ));
    }
    out.push_str("  </declared>\n</application>\n");
    out
}

use serde::{Deserialize, Serialize};

use crate::ingest::DocumentSlot;
use crate::typology::TypologyId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "variants", rename_all = "snake_case")]
pub enum ValueType {
    Text,
    Money,
    Date,
    Power,
    TaxId,
    Number,
    Enum(Vec<String>),
}

impl ValueType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ValueType::Text => "text",
            ValueType::Money => "money",
            ValueType::Date => "date",
            ValueType::Power => "power",
            ValueType::TaxId => "tax_id",
            ValueType::Number => "number",
            ValueType::Enum(_) => "enum",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagSpec {
    pub name: String,
    pub value_type: ValueType,
    pub required: bool,
}

/// The fixed tag set requested from a backend for one document slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionSchema {
    pub slot: DocumentSlot,
    pub tags: Vec<TagSpec>,
}

impl ExtractionSchema {
    pub fn tag(&self, name: &str) -> Option<&TagSpec> {
        self.tags.iter().find(|t| t.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

pub const MCP_CATEGORIES: [&str; 5] = [
    "Submission receipt issued by DGEG",
    "Screenshot of the MCP platform submission",
    "Confirmation email of MCP submission",
    "Document recognising the technician or company responsible for the electrical installation",
    "Document granting exemption from prior control",
];

pub const EXPENSE_CATEGORIES: [&str; 5] = ["windows", "insulation", "hvac", "solar", "water"];
pub const ENERGY_CLASSES: [&str; 8] = ["A+", "A", "B", "B-", "C", "D", "E", "F"];
pub const YES_NO: [&str; 2] = ["yes", "no"];
pub const PROPERTY_KINDS: [&str; 3] = ["urbano", "rustico", "misto"];
pub const BUILDING_USES: [&str; 4] = ["habitacao", "comercio", "servicos", "industria"];

fn variants(v: &[&str]) -> ValueType {
    ValueType::Enum(v.iter().map(|s| s.to_string()).collect())
}

fn tag(name: &str, value_type: ValueType, required: bool) -> TagSpec {
    TagSpec {
        name: name.to_string(),
        value_type,
        required,
    }
}

/// Deterministic tag set per (slot, typology). Photos and unclassified
/// files get an empty schema and are never sent to a backend.
pub fn schema_for(slot: DocumentSlot, typology: &TypologyId) -> ExtractionSchema {
    use ValueType::*;
    let major = typology.major();
    let mut tags = Vec::new();
    match slot {
        DocumentSlot::Invoice => {
            tags.extend([
                tag("invoice_number", Text, true),
                tag("invoice_date", Date, true),
                tag("total_value", Money, true),
                tag("buyer_name", Text, true),
                tag("buyer_tax_id", TaxId, true),
                tag("seller_tax_id", TaxId, true),
                tag("line_items_text", Text, false),
                tag("install_address", Text, false),
                tag("expense_category", variants(&EXPENSE_CATEGORIES), true),
            ]);
            match major {
                1 => tags.push(tag("window_area", Number, true)),
                2 => tags.extend([tag("insulated_area", Number, true), tag("insulation_material", Text, true)]),
                3 | 5 => tags.push(tag("equipment_model", Text, true)),
                4 => tags.extend([
                    tag("panel_model", Text, true),
                    tag("inverter_model", Text, true),
                    tag("battery_model", Text, false),
                    tag("panel_count", Number, true),
                    tag("battery_count", Number, false),
                    tag("battery_power", Power, false),
                ]),
                _ => {}
            }
        }
        DocumentSlot::Receipt => tags.extend([
            tag("receipt_number", Text, true),
            tag("receipt_date", Date, true),
            tag("amount", Money, true),
            tag("payer_tax_id", TaxId, true),
        ]),
        DocumentSlot::PropertyRegistry => tags.extend([
            tag("owner_name", Text, true),
            tag("owner_tax_id", TaxId, true),
            tag("address", Text, true),
            tag("property_type", Text, true),
            tag("property_kind", variants(&PROPERTY_KINDS), true),
            tag("property_article", Text, true),
            tag("gross_area", Number, true),
            tag("building_use", variants(&BUILDING_USES), true),
            tag("multiple_owners", variants(&YES_NO), true),
            tag("license_year", Number, false),
            tag("certificate_date", Date, true),
        ]),
        DocumentSlot::PriorCommunication => tags.extend([
            tag("mcp_type", variants(&["1", "2", "3", "4", "5"]), true),
            tag("ID_energy_producer", Text, true),
            tag("NIF_NIPC_mcp", TaxId, true),
            tag("address_mcp", Text, true),
            tag("energy_source_mcp", Text, true),
            tag("generator_power_mcp", Power, true),
            tag("nominal_power_mcp", Power, true),
            tag("date_start_mcp", Date, true),
            tag("date_submission_mcp", Date, true),
        ]),
        DocumentSlot::EnergyCertificate => tags.extend([
            tag("certificate_number", Text, true),
            tag("energy_class", variants(&ENERGY_CLASSES), true),
            tag("issue_date", Date, true),
        ]),
        DocumentSlot::EquipmentDatasheet => {
            tags.push(tag("equipment_type", Text, true));
            match major {
                1 => tags.extend([
                    tag("ce_mark", variants(&YES_NO), true),
                    tag("energy_class", variants(&ENERGY_CLASSES), true),
                    tag("classe_id", Text, true),
                ]),
                2 => tags.extend([
                    tag("ce_mark", variants(&YES_NO), true),
                    tag("insulation_material", Text, true),
                ]),
                3 | 5 => tags.extend([
                    tag("ce_mark", variants(&YES_NO), true),
                    tag("equipment_model", Text, true),
                    tag("energy_class", variants(&ENERGY_CLASSES), true),
                ]),
                4 => tags.extend([
                    tag("panel_model", Text, true),
                    tag("inverter_model", Text, true),
                    tag("battery_model", Text, false),
                    tag("battery_power", Power, false),
                    tag("panel_ce_mark", variants(&YES_NO), true),
                    tag("inverter_ce_mark", variants(&YES_NO), true),
                    tag("battery_ce_mark", variants(&YES_NO), false),
                ]),
                _ => {}
            }
        }
        DocumentSlot::Photo | DocumentSlot::Other => {}
    }
    ExtractionSchema { slot, tags }
}

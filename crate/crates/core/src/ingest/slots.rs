use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Which supporting-document role a file plays in an application.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocumentSlot {
    Invoice,
    Receipt,
    /// Permanent property-registry certificate (CPU).
    PropertyRegistry,
    /// Prior communication for small energy producers (MCP).
    PriorCommunication,
    EnergyCertificate,
    EquipmentDatasheet,
    Photo,
    Other,
}

impl DocumentSlot {
    pub const ALL: [DocumentSlot; 8] = [
        DocumentSlot::Invoice,
        DocumentSlot::Receipt,
        DocumentSlot::PropertyRegistry,
        DocumentSlot::PriorCommunication,
        DocumentSlot::EnergyCertificate,
        DocumentSlot::EquipmentDatasheet,
        DocumentSlot::Photo,
        DocumentSlot::Other,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DocumentSlot::Invoice => "invoice",
            DocumentSlot::Receipt => "receipt",
            DocumentSlot::PropertyRegistry => "property_registry",
            DocumentSlot::PriorCommunication => "prior_communication",
            DocumentSlot::EnergyCertificate => "energy_certificate",
            DocumentSlot::EquipmentDatasheet => "equipment_datasheet",
            DocumentSlot::Photo => "photo",
            DocumentSlot::Other => "other",
        }
    }

    fn dir_aliases(&self) -> &'static [&'static str] {
        match self {
            DocumentSlot::Invoice => &["invoice", "invoices", "fatura", "faturas"],
            DocumentSlot::Receipt => &["receipt", "receipts", "recibo", "recibos"],
            DocumentSlot::PropertyRegistry => &["property_registry", "cpu", "certidao"],
            DocumentSlot::PriorCommunication => &["prior_communication", "mcp"],
            DocumentSlot::EnergyCertificate => &["energy_certificate", "certificado_energetico"],
            DocumentSlot::EquipmentDatasheet => &["equipment_datasheet", "datasheet", "datasheets", "ficha_tecnica"],
            DocumentSlot::Photo => &["photo", "photos", "foto", "fotos"],
            DocumentSlot::Other => &["other", "outros"],
        }
    }
}

impl fmt::Display for DocumentSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DocumentSlot {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocumentSlot::ALL
            .into_iter()
            .find(|slot| slot.as_str() == s)
            .ok_or_else(|| format!("unknown document slot {s:?}"))
    }
}

/// Filename keywords, checked in order.
const KEYWORDS: &[(&str, DocumentSlot)] = &[
    ("fatura", DocumentSlot::Invoice),
    ("factura", DocumentSlot::Invoice),
    ("invoice", DocumentSlot::Invoice),
    ("recibo", DocumentSlot::Receipt),
    ("receipt", DocumentSlot::Receipt),
    ("certidao", DocumentSlot::PropertyRegistry),
    ("registo_predial", DocumentSlot::PropertyRegistry),
    ("cpu", DocumentSlot::PropertyRegistry),
    ("certificado", DocumentSlot::EnergyCertificate),
    ("energy_cert", DocumentSlot::EnergyCertificate),
    ("sce", DocumentSlot::EnergyCertificate),
    ("mcp", DocumentSlot::PriorCommunication),
    ("dgeg", DocumentSlot::PriorCommunication),
    ("comunicacao", DocumentSlot::PriorCommunication),
    ("ficha", DocumentSlot::EquipmentDatasheet),
    ("datasheet", DocumentSlot::EquipmentDatasheet),
    ("foto", DocumentSlot::Photo),
    ("photo", DocumentSlot::Photo),
];

fn fold(s: &str) -> String {
    s.nfd()
        .filter(|c| !is_combining_mark(*c))
        .collect::<String>()
        .to_lowercase()
}

/// Slot for a path relative to the application directory (archive members
/// are `archive.zip/member/path`). The enclosing upload-field directory wins,
/// then filename keywords, then [`DocumentSlot::Other`].
pub fn infer_slot(rel_path: &str) -> DocumentSlot {
    let components: Vec<&str> = rel_path.split('/').filter(|c| !c.is_empty()).collect();
    if components.len() >= 2 {
        let parent = fold(components[components.len() - 2]);
        if let Some(slot) = DocumentSlot::ALL
            .into_iter()
            .find(|slot| slot.dir_aliases().contains(&parent.as_str()))
        {
            return slot;
        }
    }
    let name = fold(components.last().copied().unwrap_or(""));
    KEYWORDS
        .iter()
        .find(|(kw, _)| name.contains(kw))
        .map(|(_, slot)| *slot)
        .unwrap_or(DocumentSlot::Other)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_then_keyword_then_other() {
        assert_eq!(infer_slot("invoice/scan.pdf"), DocumentSlot::Invoice);
        assert_eq!(infer_slot("Faturas/scan.pdf"), DocumentSlot::Invoice);
        assert_eq!(infer_slot("recibo_2023.pdf"), DocumentSlot::Receipt);
        assert_eq!(infer_slot("scan001.jpg"), DocumentSlot::Other);
        assert_eq!(infer_slot("Certidão_Permanente.pdf"), DocumentSlot::PropertyRegistry);
        assert_eq!(infer_slot("comprovativo_mcp.pdf"), DocumentSlot::PriorCommunication);
        assert_eq!(infer_slot("docs.zip/fatura.pdf"), DocumentSlot::Invoice);
        assert_eq!(infer_slot("docs.zip/receipt/a.pdf"), DocumentSlot::Receipt);
        // directory beats keywords
        assert_eq!(infer_slot("photos/fatura.jpg"), DocumentSlot::Photo);
    }

    #[test]
    fn slot_names_round_trip() {
        for slot in DocumentSlot::ALL {
            assert_eq!(slot.as_str().parse::<DocumentSlot>().unwrap(), slot);
        }
    }
}

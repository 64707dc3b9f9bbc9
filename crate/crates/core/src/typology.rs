//! Intervention typologies and their sub-typologies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A catalog typology such as `4` or `2.1.1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypologyId {
    major: u8,
    sub_path: Vec<u8>,
}

/// Catalog identifiers, in table order. Solar (4) has no sub-typology rows
/// while water efficiency has two (5.1, 5.2).
pub const CATALOG_IDS: [&str; 11] = [
    "1", "2.1.1", "2.1.2", "2.2.1", "2.2.2", "3.1", "3.2", "3.3", "4", "5.1", "5.2",
];

/// Default application share per major typology (1..=5), in percent.
pub const DEFAULT_MIX: [f64; 5] = [27.34, 1.36, 48.06, 22.72, 0.52];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown typology {given:?}; valid ids are {}", CATALOG_IDS.join(", "))]
pub struct UnknownTypology {
    pub given: String,
}

impl TypologyId {
    pub fn major(&self) -> u8 {
        self.major
    }

    pub fn sub_path(&self) -> &[u8] {
        &self.sub_path
    }

    pub fn all() -> Vec<TypologyId> {
        CATALOG_IDS
            .iter()
            .map(|s| s.parse().expect("catalog ids parse"))
            .collect()
    }

    /// Catalog entries under a major typology.
    pub fn under_major(major: u8) -> Vec<TypologyId> {
        Self::all().into_iter().filter(|t| t.major == major).collect()
    }

    pub fn major_name(&self) -> &'static str {
        match self.major {
            1 => "Window replacement",
            2 => "Thermal insulation",
            3 => "Heating and cooling systems",
            4 => "Solar panels",
            _ => "Water efficiency",
        }
    }

    /// Matches a catalog pattern: `*`, a major (`2`), or an exact id.
    pub fn matches_pattern(&self, pattern: &str) -> bool {
        if pattern == "*" {
            return true;
        }
        if let Ok(major) = pattern.parse::<u8>() {
            return self.major == major;
        }
        self.to_string() == pattern
    }

    /// Declared form fields every application of this typology must carry.
    pub fn mandatory_fields(&self) -> Vec<&'static str> {
        let mut fields = vec![
            "applicant_name",
            "applicant_tax_id",
            "property_address",
            "property_type",
            "property_article",
            "gross_area",
            "invoice_number",
            "invoice_value",
            "company_tax_id",
            "equipment_type",
            "submission_date",
        ];
        match self.major {
            1 => fields.push("window_area"),
            2 => fields.push("insulated_area"),
            4 => fields.extend([
                "energy_source",
                "peak_power",
                "inverter_power",
                "battery_power",
                "panel_count",
                "battery_count",
            ]),
            _ => {}
        }
        fields
    }
}

impl fmt::Display for TypologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.major)?;
        for s in &self.sub_path {
            write!(f, ".{s}")?;
        }
        Ok(())
    }
}

impl FromStr for TypologyId {
    type Err = UnknownTypology;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        let err = || UnknownTypology {
            given: s.to_string(),
        };
        if !CATALOG_IDS.contains(&trimmed) {
            return Err(err());
        }
        let mut parts = trimmed.split('.').map(|p| p.parse::<u8>().map_err(|_| err()));
        let major = parts.next().ok_or_else(err)??;
        let sub_path = parts.collect::<Result<Vec<_>, _>>()?;
        Ok(TypologyId { major, sub_path })
    }
}

impl Serialize for TypologyId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TypologyId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

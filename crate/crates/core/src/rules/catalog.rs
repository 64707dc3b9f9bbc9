use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ReportKind;
use crate::extract::{schema_for, ValueType};
use crate::ingest::{form_field_type, DeclaredType, DocumentSlot};
use crate::normalize::DateValue;
use crate::typology::{TypologyId, UnknownTypology};

/// The catalog shipped with the crate.
pub const BUILTIN_CATALOG: &str = include_str!("../../catalog/reclaim.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplicationField {
    SubmissionDate,
}

/// Where an operand comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selector {
    Doc { doc: DocumentSlot, tag: String },
    Form { form: String },
    Application { application: ApplicationField },
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Doc { doc, tag } => write!(f, "{}.{tag}", doc.as_str()),
            Selector::Form { form } => write!(f, "form.{form}"),
            Selector::Application { .. } => f.write_str("application.submission_date"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Exact,
    Fuzzy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Comparator {
    /// `None` falls back to the catalog-wide tolerance.
    EqualMoney {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tolerance_cents: Option<i64>,
    },
    EqualPower {
        #[serde(default)]
        tolerance_watts: u64,
    },
    DateGeq,
    DateLt,
    DateNotBefore { date: DateValue },
    /// `rhs - lhs` in `0..=max_age_days`; without a window the check is always manual.
    DateWithinDays {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_age_days: Option<u32>,
    },
    /// `lo_pct% · rhs ≤ lhs ≤ hi_pct% · rhs`.
    InRangePct {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        lo_pct: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hi_pct: Option<u32>,
    },
    TextMatch {
        mode: MatchMode,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        threshold: Option<f64>,
    },
    TextDiffers,
    EnumIs { variant: String },
    Present,
}

impl Comparator {
    pub fn is_unary(&self) -> bool {
        matches!(
            self,
            Comparator::DateNotBefore { .. } | Comparator::EnumIs { .. } | Comparator::Present
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Comparator::EqualMoney { .. } => "equal_money",
            Comparator::EqualPower { .. } => "equal_power",
            Comparator::DateGeq => "date_geq",
            Comparator::DateLt => "date_lt",
            Comparator::DateNotBefore { .. } => "date_not_before",
            Comparator::DateWithinDays { .. } => "date_within_days",
            Comparator::InRangePct { .. } => "in_range_pct",
            Comparator::TextMatch { .. } => "text_match",
            Comparator::TextDiffers => "text_differs",
            Comparator::EnumIs { .. } => "enum_is",
            Comparator::Present => "present",
        }
    }
}

/// Extra applicability test; a check whose condition does not hold is not applicable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    MoneyGt { operand: Selector, cents: i64 },
    EnumIs { operand: Selector, variant: String },
    EnumNot { operand: Selector, variant: String },
}

impl Condition {
    pub fn operand(&self) -> &Selector {
        match self {
            Condition::MoneyGt { operand, .. }
            | Condition::EnumIs { operand, .. }
            | Condition::EnumNot { operand, .. } => operand,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckDefinition {
    pub id: String,
    pub report: ReportKind,
    pub description: String,
    pub typologies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when: Option<Condition>,
    pub lhs: Selector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Selector>,
    pub comparator: Comparator,
    pub source: String,
}

impl CheckDefinition {
    pub fn applies_to(&self, typology: &TypologyId) -> bool {
        self.typologies.iter().any(|p| typology.matches_pattern(p))
    }

    /// Every selector the outcome depends on, condition first.
    pub fn selectors(&self) -> impl Iterator<Item = &Selector> {
        self.when
            .as_ref()
            .map(Condition::operand)
            .into_iter()
            .chain(std::iter::once(&self.lhs))
            .chain(self.rhs.as_ref())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedCheck {
    pub id: String,
    pub report: ReportKind,
    pub description: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: String,
    pub fuzzy_threshold: f64,
    pub amount_tolerance_cents: i64,
    #[serde(rename = "check")]
    pub checks: Vec<CheckDefinition>,
    #[serde(default, rename = "excluded")]
    pub excluded: Vec<ExcludedCheck>,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog is not valid TOML: {0}")]
    Parse(String),
    #[error("catalog check {id}: {problem}")]
    Invalid { id: String, problem: String },
}

fn invalid(id: &str, problem: impl Into<String>) -> CatalogError {
    CatalogError::Invalid {
        id: id.to_string(),
        problem: problem.into(),
    }
}

/// Value family an operand is statically known to have.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Text,
    Money,
    Date,
    Numeric,
    TaxId,
    Enum,
}

fn declared_family(t: DeclaredType) -> Family {
    match t {
        DeclaredType::Text => Family::Text,
        DeclaredType::Money => Family::Money,
        DeclaredType::Date => Family::Date,
        DeclaredType::Number => Family::Numeric,
        DeclaredType::TaxId => Family::TaxId,
    }
}

fn tag_family(t: &ValueType) -> Family {
    match t {
        ValueType::Text => Family::Text,
        ValueType::Money => Family::Money,
        ValueType::Date => Family::Date,
        ValueType::Power | ValueType::Number => Family::Numeric,
        ValueType::TaxId => Family::TaxId,
        ValueType::Enum(_) => Family::Enum,
    }
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CATALOG).expect("built-in catalog is valid")
    }

    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        let catalog: Catalog = toml::from_str(text).map_err(|e| CatalogError::Parse(e.to_string()))?;
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, CatalogError> {
        let text = std::fs::read_to_string(path).map_err(|source| CatalogError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Applicable checks for one typology, in catalog order.
    pub fn checks_for(&self, typology: &TypologyId) -> Vec<&CheckDefinition> {
        self.checks.iter().filter(|c| c.applies_to(typology)).collect()
    }

    pub fn checks_for_id(&self, typology: &str) -> Result<Vec<&CheckDefinition>, UnknownTypology> {
        let t: TypologyId = typology.parse()?;
        Ok(self.checks_for(&t))
    }

    pub fn check(&self, id: &str) -> Option<&CheckDefinition> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn validate(&self) -> Result<(), CatalogError> {
        if !(0.0..=1.0).contains(&self.fuzzy_threshold) {
            return Err(invalid("<catalog>", "fuzzy_threshold must lie in [0, 1]"));
        }
        if self.amount_tolerance_cents < 0 {
            return Err(invalid("<catalog>", "amount_tolerance_cents must be non-negative"));
        }
        let mut seen = BTreeSet::new();
        for c in &self.checks {
            if !seen.insert(c.id.as_str()) {
                return Err(invalid(&c.id, "duplicate check id"));
            }
            self.validate_check(c)?;
        }
        for x in &self.excluded {
            if !seen.insert(x.id.as_str()) {
                return Err(invalid(&x.id, "duplicate check id"));
            }
        }
        Ok(())
    }

    fn validate_check(&self, c: &CheckDefinition) -> Result<(), CatalogError> {
        let typologies: Vec<TypologyId> = TypologyId::all().into_iter().filter(|t| c.applies_to(t)).collect();
        for p in &c.typologies {
            if !TypologyId::all().iter().any(|t| t.matches_pattern(p)) {
                return Err(invalid(&c.id, format!("typology pattern {p:?} matches no catalog typology")));
            }
        }
        if typologies.is_empty() {
            return Err(invalid(&c.id, "applies to no typology"));
        }
        match (c.comparator.is_unary(), &c.rhs) {
            (true, Some(_)) => return Err(invalid(&c.id, format!("{} takes one operand", c.comparator.name()))),
            (false, None) => return Err(invalid(&c.id, format!("{} needs an rhs operand", c.comparator.name()))),
            _ => {}
        }
        if let Comparator::TextMatch {
            threshold: Some(t), ..
        } = c.comparator
        {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid(&c.id, "threshold must lie in [0, 1]"));
            }
        }
        for t in &typologies {
            let lhs = self.family_of(c, &c.lhs, t)?;
            let rhs = c.rhs.as_ref().map(|s| self.family_of(c, s, t)).transpose()?;
            if let Some(cond) = &c.when {
                let fam = self.family_of(c, cond.operand(), t)?;
                let ok = match cond {
                    Condition::MoneyGt { .. } => fam == Family::Money,
                    Condition::EnumIs { .. } | Condition::EnumNot { .. } => fam == Family::Enum,
                };
                if !ok {
                    return Err(invalid(&c.id, "condition operand has the wrong type"));
                }
            }
            if !comparator_accepts(&c.comparator, lhs, rhs) {
                return Err(invalid(
                    &c.id,
                    format!("{} cannot compare {lhs:?} with {rhs:?} (typology {t})", c.comparator.name()),
                ));
            }
            if let (Comparator::EnumIs { variant }, Selector::Doc { doc, tag }) = (&c.comparator, &c.lhs) {
                let schema = schema_for(*doc, t);
                if let Some(ValueType::Enum(vs)) = schema.tag(tag).map(|s| &s.value_type) {
                    if !vs.contains(variant) {
                        return Err(invalid(&c.id, format!("{variant:?} is not a variant of {tag}")));
                    }
                }
            }
        }
        Ok(())
    }

    fn family_of(&self, c: &CheckDefinition, s: &Selector, t: &TypologyId) -> Result<Family, CatalogError> {
        match s {
            Selector::Application { .. } => Ok(Family::Date),
            Selector::Form { form } => {
                if !t.mandatory_fields().contains(&form.as_str()) {
                    return Err(invalid(&c.id, format!("form field {form} is not declared for typology {t}")));
                }
                form_field_type(form)
                    .map(declared_family)
                    .ok_or_else(|| invalid(&c.id, format!("unknown form field {form}")))
            }
            Selector::Doc { doc, tag } => schema_for(*doc, t)
                .tag(tag)
                .map(|tag_def| tag_family(&tag_def.value_type))
                .ok_or_else(|| invalid(&c.id, format!("{} schema has no tag {tag} for typology {t}", doc.as_str()))),
        }
    }
}

fn comparator_accepts(c: &Comparator, lhs: Family, rhs: Option<Family>) -> bool {
    use Family::*;
    match c {
        Comparator::EqualMoney { .. } => lhs == Money && rhs == Some(Money),
        Comparator::EqualPower { .. } | Comparator::InRangePct { .. } => lhs == Numeric && rhs == Some(Numeric),
        Comparator::DateGeq | Comparator::DateLt | Comparator::DateWithinDays { .. } => {
            lhs == Date && rhs == Some(Date)
        }
        Comparator::DateNotBefore { .. } => lhs == Date,
        Comparator::TextMatch { .. } | Comparator::TextDiffers => matches!(
            (lhs, rhs),
            (Text | Enum, Some(Text | Enum)) | (TaxId, Some(TaxId)) | (Numeric, Some(Numeric))
        ),
        Comparator::EnumIs { .. } => lhs == Enum,
        Comparator::Present => true,
    }
}

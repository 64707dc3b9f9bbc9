//! Typology-aware verification checks with tri-state outcomes.
//!
//! A check is auto-verified only when every operand is present and the
//! comparator holds. Anything missing, unreadable or doubtful goes to a
//! reviewer as a manual check. Checks that depend on a document that only
//! exists in an unsupported format are reported as unsupported.

mod catalog;
mod engine;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use catalog::{
    ApplicationField, Catalog, CatalogError, CheckDefinition, Comparator, Condition, ExcludedCheck, MatchMode, Selector,
    BUILTIN_CATALOG,
};
pub use engine::{evaluate_application, evaluate_check, EvalContext, EvalParams, ReportOutcomes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Eligibility,
    CommonCore,
    Typology,
}

impl ReportKind {
    pub const ALL: [ReportKind; 3] = [ReportKind::Eligibility, ReportKind::CommonCore, ReportKind::Typology];

    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::Eligibility => "eligibility",
            ReportKind::CommonCore => "common_core",
            ReportKind::Typology => "typology",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            ReportKind::Eligibility => "Eligibility",
            ReportKind::CommonCore => "Common Core",
            ReportKind::Typology => "Typology",
        }
    }
}

impl fmt::Display for ReportKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    AutoVerified,
    ManualCheck,
    NotApplicable,
    Unsupported,
}

impl CheckStatus {
    pub const ALL: [CheckStatus; 4] = [
        CheckStatus::AutoVerified,
        CheckStatus::ManualCheck,
        CheckStatus::NotApplicable,
        CheckStatus::Unsupported,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::AutoVerified => "auto_verified",
            CheckStatus::ManualCheck => "manual_check",
            CheckStatus::NotApplicable => "not_applicable",
            CheckStatus::Unsupported => "unsupported",
        }
    }

    /// Reviewer-facing label.
    pub fn label(&self) -> &'static str {
        match self {
            CheckStatus::AutoVerified => "No verification needed",
            CheckStatus::ManualCheck => "Manual check",
            CheckStatus::NotApplicable => "Not applicable",
            CheckStatus::Unsupported => "Unsupported document",
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperandState {
    Present,
    /// Present but doubtful, e.g. a unit was assumed or a declared value did not parse.
    Warning,
    Absent,
    Unreadable,
    Unsupported,
}

/// One rendered operand of a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceItem {
    pub source: String,
    pub state: OperandState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<EvidenceItem>,
    pub lhs: EvidenceItem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<EvidenceItem>,
}

impl Evidence {
    pub fn items(&self) -> impl Iterator<Item = &EvidenceItem> {
        self.condition.iter().chain(std::iter::once(&self.lhs)).chain(self.rhs.iter())
    }

    pub fn any_unreadable(&self) -> bool {
        self.items().any(|i| i.state == OperandState::Unreadable)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check_id: String,
    pub description: String,
    pub status: CheckStatus,
    pub evidence: Evidence,
    pub message: String,
}

//! What each check ought to conclude, computed from the true values
//! rather than from rendered and re-parsed text.

use std::collections::BTreeMap;

use super::facts::{AppFacts, Fact, Site};
use crate::ingest::DocumentSlot;
use crate::rules::{ApplicationField, CheckDefinition, CheckStatus, Comparator, Condition, Selector};

/// Whether a document can be read by the extraction backend at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DocState {
    Readable,
    Unsupported,
    ReadFailure,
}

pub struct TruthView<'a> {
    pub facts: &'a AppFacts,
    pub docs: &'a BTreeMap<DocumentSlot, DocState>,
    pub tolerance_cents: i64,
}

enum Operand<'a> {
    Value(&'a Fact),
    Missing,
    Unreadable,
    Unsupported,
}

pub fn selector_site(selector: &Selector) -> Site {
    match selector {
        Selector::Form { form } => Site::form(form),
        Selector::Application {
            application: ApplicationField::SubmissionDate,
        } => Site::form("submission_date"),
        Selector::Doc { doc, tag } => Site::doc(*doc, tag),
    }
}

impl TruthView<'_> {
    fn operand(&self, selector: &Selector) -> Operand<'_> {
        let site = selector_site(selector);
        if let Site::Doc { doc, .. } = &site {
            match self.docs.get(doc) {
                None => return Operand::Missing,
                Some(DocState::Unsupported) => return Operand::Unsupported,
                Some(DocState::ReadFailure) => return Operand::Unreadable,
                Some(DocState::Readable) => {}
            }
        }
        self.facts.get(&site).map_or(Operand::Missing, Operand::Value)
    }
}

fn number(f: &Fact) -> Option<f64> {
    match f {
        Fact::Number(n) => Some(*n),
        Fact::Power(w) => Some(*w as f64),
        _ => None,
    }
}

fn same(a: &Fact, b: &Fact) -> bool {
    match (number(a), number(b)) {
        (Some(x), Some(y)) => x == y,
        _ => a == b,
    }
}

/// `Some(true)` holds, `Some(false)` fails, `None` cannot be decided.
fn holds(comparator: &Comparator, lhs: &Fact, rhs: Option<&Fact>, tolerance_cents: i64) -> Option<bool> {
    use Fact::*;
    Some(match (comparator, lhs, rhs) {
        (Comparator::Present, _, _) => true,
        (Comparator::EnumIs { variant }, Enum(v), _) => v.eq_ignore_ascii_case(variant),
        (Comparator::DateNotBefore { date }, Date(d), _) => d >= date,
        (Comparator::EqualMoney { tolerance_cents: t }, Money(a), Some(Money(b))) => {
            (a - b).abs() <= t.unwrap_or(tolerance_cents)
        }
        (Comparator::EqualPower { tolerance_watts }, a, Some(b)) => {
            (number(a)? - number(b)?).abs() <= *tolerance_watts as f64
        }
        (Comparator::DateGeq, Date(a), Some(Date(b))) => a >= b,
        (Comparator::DateLt, Date(a), Some(Date(b))) => a < b,
        (Comparator::DateWithinDays { max_age_days }, Date(a), Some(Date(b))) => {
            let age = b.days_since(a);
            age >= 0 && age <= i64::from((*max_age_days)?)
        }
        (Comparator::InRangePct { lo_pct, hi_pct }, a, Some(b)) => {
            let (v, base) = (number(a)?, number(b)?);
            lo_pct.map_or(true, |lo| v * 100.0 >= f64::from(lo) * base)
                && hi_pct.map_or(true, |hi| v * 100.0 <= f64::from(hi) * base)
        }
        (Comparator::TextMatch { .. }, a, Some(b)) => same(a, b),
        (Comparator::TextDiffers, a, Some(b)) => !same(a, b),
        _ => return None,
    })
}

fn condition_holds(cond: &Condition, f: &Fact) -> Option<bool> {
    match (cond, f) {
        (Condition::MoneyGt { cents, .. }, Fact::Money(m)) => Some(m > cents),
        (Condition::EnumIs { variant, .. }, Fact::Enum(v)) => Some(v.eq_ignore_ascii_case(variant)),
        (Condition::EnumNot { variant, .. }, Fact::Enum(v)) => Some(!v.eq_ignore_ascii_case(variant)),
        _ => None,
    }
}

/// The status a sound engine must give `def` on this application.
pub fn expected_status(def: &CheckDefinition, view: &TruthView<'_>) -> CheckStatus {
    if let Some(cond) = &def.when {
        match view.operand(cond.operand()) {
            Operand::Unsupported => return CheckStatus::Unsupported,
            Operand::Missing | Operand::Unreadable => return CheckStatus::ManualCheck,
            Operand::Value(f) => match condition_holds(cond, f) {
                Some(true) => {}
                Some(false) => return CheckStatus::NotApplicable,
                None => return CheckStatus::ManualCheck,
            },
        }
    }
    let operands: Vec<Operand<'_>> = std::iter::once(&def.lhs)
        .chain(def.rhs.as_ref())
        .map(|s| view.operand(s))
        .collect();
    if operands.iter().any(|o| matches!(o, Operand::Unsupported)) {
        return CheckStatus::Unsupported;
    }
    let values: Vec<&Fact> = operands
        .iter()
        .filter_map(|o| match o {
            Operand::Value(f) => Some(*f),
            _ => None,
        })
        .collect();
    if values.len() != operands.len() {
        return CheckStatus::ManualCheck;
    }
    match holds(&def.comparator, values[0], values.get(1).copied(), view.tolerance_cents) {
        Some(true) => CheckStatus::AutoVerified,
        _ => CheckStatus::ManualCheck,
    }
}

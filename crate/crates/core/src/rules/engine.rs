use std::collections::BTreeMap;

use super::catalog::{ApplicationField, Catalog, CheckDefinition, Comparator, Condition, MatchMode, Selector};
use super::{CheckOutcome, CheckStatus, Evidence, EvidenceItem, OperandState, ReportKind};
use crate::extract::{ExtractedDocument, ExtractedValue};
use crate::ingest::{ApplicationBundle, FormData, UnsupportedNotice};
use crate::normalize::{fuzzy_score, normalize_name};
use crate::value::TypedValue;

/// Run-time tolerances; the catalog supplies defaults, the CLI may override.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub fuzzy_threshold: f64,
    pub amount_tolerance_cents: i64,
}

impl EvalParams {
    pub fn from_catalog(catalog: &Catalog) -> Self {
        Self {
            fuzzy_threshold: catalog.fuzzy_threshold,
            amount_tolerance_cents: catalog.amount_tolerance_cents,
        }
    }
}

/// Everything a check may read for one application.
#[derive(Debug, Clone, Copy)]
pub struct EvalContext<'a> {
    pub form: &'a FormData,
    /// Extracted documents, ordered by relative path.
    pub docs: &'a [ExtractedDocument],
    pub unsupported: &'a [UnsupportedNotice],
    pub params: EvalParams,
}

struct Resolved {
    item: EvidenceItem,
    value: Option<TypedValue>,
}

impl Resolved {
    fn present(source: String, value: TypedValue) -> Self {
        Self {
            item: EvidenceItem {
                source,
                state: OperandState::Present,
                value: Some(value.to_string()),
                detail: None,
            },
            value: Some(value),
        }
    }

    fn missing(source: String, state: OperandState, value: Option<String>, detail: String) -> Self {
        Self {
            item: EvidenceItem {
                source,
                state,
                value,
                detail: Some(detail),
            },
            value: None,
        }
    }
}

fn resolve_form(form: &FormData, field: &str, source: String) -> Resolved {
    match form.get(field) {
        None => Resolved::missing(source, OperandState::Absent, None, "not declared on the form".into()),
        Some(f) => match &f.warning {
            Some(w) => Resolved::missing(source, OperandState::Warning, Some(f.raw.clone()), w.clone()),
            None => Resolved::present(source, f.value.clone()),
        },
    }
}

fn resolve(ctx: &EvalContext<'_>, selector: &Selector) -> Resolved {
    match selector {
        Selector::Form { form } => resolve_form(ctx.form, form, selector.to_string()),
        Selector::Application {
            application: ApplicationField::SubmissionDate,
        } => resolve_form(ctx.form, "submission_date", selector.to_string()),
        Selector::Doc { doc, tag } => {
            let in_slot: Vec<&ExtractedDocument> = ctx.docs.iter().filter(|d| d.doc.slot == *doc).collect();
            if in_slot.is_empty() {
                let notices: Vec<&str> = ctx
                    .unsupported
                    .iter()
                    .filter(|n| n.slot == *doc)
                    .map(|n| n.rel_path.as_str())
                    .collect();
                return if notices.is_empty() {
                    Resolved::missing(
                        selector.to_string(),
                        OperandState::Absent,
                        None,
                        format!("no {} document supplied", doc.as_str()),
                    )
                } else {
                    Resolved::missing(
                        selector.to_string(),
                        OperandState::Unsupported,
                        None,
                        format!("only available in unsupported files: {}", notices.join(", ")),
                    )
                };
            }
            let source_of = |d: &ExtractedDocument| format!("{}#{tag}", d.doc.rel_path);
            let mut first_unreadable = None;
            for d in &in_slot {
                match d.fields.get(tag) {
                    Some(ExtractedValue::Present { value, raw, warnings }) => {
                        return if warnings.is_empty() {
                            Resolved::present(source_of(d), value.clone())
                        } else {
                            let detail = warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>().join("; ");
                            Resolved::missing(source_of(d), OperandState::Warning, Some(raw.clone()), detail)
                        };
                    }
                    Some(ExtractedValue::Unreadable { reason, raw }) if first_unreadable.is_none() => {
                        first_unreadable = Some(Resolved::missing(
                            source_of(d),
                            OperandState::Unreadable,
                            raw.clone(),
                            format!("value could not be read ({reason})"),
                        ));
                    }
                    _ => {}
                }
            }
            first_unreadable.unwrap_or_else(|| {
                Resolved::missing(
                    source_of(in_slot[0]),
                    OperandState::Absent,
                    None,
                    "value not found in the document".into(),
                )
            })
        }
    }
}

enum Verdict {
    Holds,
    Fails(String),
    /// Cannot be decided automatically even with both values in hand.
    Undecidable(String),
}

fn numeric(v: &TypedValue) -> Option<f64> {
    match v {
        TypedValue::Number(n) => Some(*n),
        TypedValue::Power(p) => Some(p.watts as f64),
        _ => None,
    }
}

fn mismatch(a: &TypedValue, b: Option<&TypedValue>) -> Verdict {
    Verdict::Undecidable(match b {
        Some(b) => format!("cannot compare {} with {}", a.type_name(), b.type_name()),
        None => format!("unexpected {} value", a.type_name()),
    })
}

fn same_number(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// `Ok(true)` when the values denote the same thing.
fn values_match(a: &TypedValue, b: &TypedValue, fuzzy: Option<f64>) -> Result<bool, Verdict> {
    use TypedValue::*;
    match (a, b) {
        (TaxId(x), TaxId(y)) => {
            if !x.valid || !y.valid {
                let bad = if x.valid { &y.digits } else { &x.digits };
                return Err(Verdict::Undecidable(format!("tax id {bad} fails its check digit")));
            }
            Ok(x.digits == y.digits)
        }
        (Text(x) | Enum(x), Text(y) | Enum(y)) => {
            let (cx, cy) = (normalize_name(x), normalize_name(y));
            Ok(match fuzzy {
                None => cx.canonical == cy.canonical,
                Some(t) => fuzzy_score(&cx, &cy) >= t,
            })
        }
        _ => match (numeric(a), numeric(b)) {
            (Some(x), Some(y)) => Ok(same_number(x, y)),
            _ => Err(mismatch(a, Some(b))),
        },
    }
}

fn compare(comparator: &Comparator, lhs: &TypedValue, rhs: Option<&TypedValue>, params: &EvalParams) -> Verdict {
    use TypedValue::*;
    let fails = |why: &str| Verdict::Fails(why.to_string());
    match (comparator, rhs) {
        (Comparator::Present, _) => Verdict::Holds,
        (Comparator::EnumIs { variant }, _) => match lhs {
            // Variants such as "A+" and "A" differ only in punctuation, so no name folding here.
            Enum(v) | Text(v) => {
                if v.trim().to_lowercase() == variant.trim().to_lowercase() {
                    Verdict::Holds
                } else {
                    Verdict::Fails(format!("expected {variant}, found {v}"))
                }
            }
            _ => mismatch(lhs, None),
        },
        (Comparator::DateNotBefore { date }, _) => match lhs {
            Date(d) if d >= date => Verdict::Holds,
            Date(_) => Verdict::Fails(format!("date is before {date}")),
            _ => mismatch(lhs, None),
        },
        (_, None) => Verdict::Undecidable("comparator needs two operands".into()),
        (Comparator::EqualMoney { tolerance_cents }, Some(rhs)) => match (lhs, rhs) {
            (Money(a), Money(b)) if a.currency != b.currency => {
                Verdict::Undecidable(format!("currencies differ ({} vs {})", a.currency, b.currency))
            }
            (Money(a), Money(b)) => {
                let tol = tolerance_cents.unwrap_or(params.amount_tolerance_cents);
                if (a.amount_cents - b.amount_cents).abs() <= tol {
                    Verdict::Holds
                } else {
                    fails("amounts differ")
                }
            }
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::EqualPower { tolerance_watts }, Some(rhs)) => match (numeric(lhs), numeric(rhs)) {
            (Some(a), Some(b)) if (a - b).abs() <= *tolerance_watts as f64 + 1e-9 => Verdict::Holds,
            (Some(_), Some(_)) => fails("power ratings differ"),
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::DateGeq, Some(rhs)) => match (lhs, rhs) {
            (Date(a), Date(b)) if a >= b => Verdict::Holds,
            (Date(_), Date(_)) => fails("first date is earlier than the second"),
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::DateLt, Some(rhs)) => match (lhs, rhs) {
            (Date(a), Date(b)) if a < b => Verdict::Holds,
            (Date(_), Date(_)) => fails("first date is not before the second"),
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::DateWithinDays { max_age_days }, Some(rhs)) => match (lhs, rhs, max_age_days) {
            (Date(_), Date(_), None) => Verdict::Undecidable("no validity window configured".into()),
            (Date(a), Date(b), Some(max)) => {
                let age = b.days_since(a);
                if (0..=i64::from(*max)).contains(&age) {
                    Verdict::Holds
                } else {
                    Verdict::Fails(format!("{age} days old, limit {max}"))
                }
            }
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::InRangePct { lo_pct, hi_pct }, Some(rhs)) => match (numeric(lhs), numeric(rhs)) {
            (Some(v), Some(base)) => {
                let scaled = v * 100.0;
                if lo_pct.is_some_and(|lo| scaled < f64::from(lo) * base) {
                    Verdict::Fails(format!("below {}% of {base}", lo_pct.unwrap_or_default()))
                } else if hi_pct.is_some_and(|hi| scaled > f64::from(hi) * base) {
                    Verdict::Fails(format!("above {}% of {base}", hi_pct.unwrap_or_default()))
                } else {
                    Verdict::Holds
                }
            }
            _ => mismatch(lhs, Some(rhs)),
        },
        (Comparator::TextMatch { mode, threshold }, Some(rhs)) => {
            let fuzzy = match mode {
                MatchMode::Exact => None,
                MatchMode::Fuzzy => Some(threshold.unwrap_or(params.fuzzy_threshold)),
            };
            match values_match(lhs, rhs, fuzzy) {
                Ok(true) => Verdict::Holds,
                Ok(false) => fails("values differ"),
                Err(v) => v,
            }
        }
        (Comparator::TextDiffers, Some(rhs)) => match values_match(lhs, rhs, None) {
            Ok(false) => Verdict::Holds,
            Ok(true) => fails("values are identical"),
            Err(v) => v,
        },
    }
}

fn condition_holds(cond: &Condition, v: &TypedValue) -> Option<bool> {
    match (cond, v) {
        (Condition::MoneyGt { cents, .. }, TypedValue::Money(m)) => Some(m.amount_cents > *cents),
        (Condition::EnumIs { variant, .. }, TypedValue::Enum(e)) => Some(e.eq_ignore_ascii_case(variant)),
        (Condition::EnumNot { variant, .. }, TypedValue::Enum(e)) => Some(!e.eq_ignore_ascii_case(variant)),
        _ => None,
    }
}

fn describe(item: &EvidenceItem) -> String {
    match &item.detail {
        Some(d) => format!("{}: {d}", item.source),
        None => item.source.clone(),
    }
}

/// Evaluates one check. Pure; failure modes are statuses.
pub fn evaluate_check(def: &CheckDefinition, ctx: &EvalContext<'_>) -> CheckOutcome {
    let condition = def.when.as_ref().map(|c| (c, resolve(ctx, c.operand())));
    let lhs = resolve(ctx, &def.lhs);
    let rhs = def.rhs.as_ref().map(|s| resolve(ctx, s));

    let (status, message) = decide(def, ctx, condition.as_ref(), &lhs, rhs.as_ref());
    CheckOutcome {
        check_id: def.id.clone(),
        description: def.description.clone(),
        status,
        evidence: Evidence {
            condition: condition.map(|(_, r)| r.item),
            lhs: lhs.item,
            rhs: rhs.map(|r| r.item),
        },
        message,
    }
}

fn decide(
    def: &CheckDefinition,
    ctx: &EvalContext<'_>,
    condition: Option<&(&Condition, Resolved)>,
    lhs: &Resolved,
    rhs: Option<&Resolved>,
) -> (CheckStatus, String) {
    if let Some((cond, r)) = condition {
        match &r.value {
            Some(v) => match condition_holds(cond, v) {
                Some(true) => {}
                Some(false) => {
                    return (
                        CheckStatus::NotApplicable,
                        format!("Not applicable: condition on {} not met", r.item.source),
                    )
                }
                None => {
                    return (
                        CheckStatus::ManualCheck,
                        format!("Manual check: condition operand {} has type {}", r.item.source, v.type_name()),
                    )
                }
            },
            None if r.item.state == OperandState::Unsupported => {
                return (CheckStatus::Unsupported, format!("Unsupported document: {}", describe(&r.item)))
            }
            None => return (CheckStatus::ManualCheck, format!("Manual check: {}", describe(&r.item))),
        }
    }

    let operands: Vec<&Resolved> = std::iter::once(lhs).chain(rhs).collect();
    if let Some(u) = operands.iter().find(|r| r.item.state == OperandState::Unsupported) {
        return (CheckStatus::Unsupported, format!("Unsupported document: {}", describe(&u.item)));
    }
    if let Some(m) = operands.iter().find(|r| r.value.is_none()) {
        return (CheckStatus::ManualCheck, format!("Manual check: {}", describe(&m.item)));
    }
    let lv = lhs.value.as_ref().expect("checked above");
    let rv = rhs.and_then(|r| r.value.as_ref());
    match compare(&def.comparator, lv, rv, &ctx.params) {
        Verdict::Holds => (CheckStatus::AutoVerified, CheckStatus::AutoVerified.label().to_string()),
        Verdict::Fails(why) | Verdict::Undecidable(why) => (CheckStatus::ManualCheck, format!("Manual check: {why}")),
    }
}

/// Outcomes grouped by report, each list in catalog order.
pub type ReportOutcomes = BTreeMap<ReportKind, Vec<CheckOutcome>>;

/// Evaluates every applicable check once. `docs` must be the extraction
/// results of `bundle.documents`, in the same (path) order.
pub fn evaluate_application(
    catalog: &Catalog,
    params: &EvalParams,
    bundle: &ApplicationBundle,
    docs: &[ExtractedDocument],
) -> ReportOutcomes {
    let ctx = EvalContext {
        form: &bundle.form,
        docs,
        unsupported: &bundle.unsupported,
        params: *params,
    };
    let mut out: ReportOutcomes = ReportKind::ALL.iter().map(|k| (*k, Vec::new())).collect();
    for def in catalog.checks_for(&bundle.typology) {
        out.get_mut(&def.report).expect("all kinds seeded").push(evaluate_check(def, &ctx));
    }
    out
}

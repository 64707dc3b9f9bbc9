//! Random mini-applications evaluated twice: by the rule engine and by a
//! direct transcription of the decision table over a small value model.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reclaim_core::extract::{ExtractedDocument, ExtractedValue, ExtractionMeta, UnreadableReason};
use reclaim_core::ingest::{
    DeclaredField, DocumentRef, DocumentSlot, FileKind, FormData, Origin, UnsupportedNotice, UnsupportedReason,
};
use reclaim_core::normalize::{fuzzy_score, normalize_name, DateValue, Money, ParseWarning, PowerValue, TaxId};
use reclaim_core::rules::{
    evaluate_check, ApplicationField, CheckDefinition, CheckStatus, Comparator, Condition, EvalContext, EvalParams,
    MatchMode, ReportKind, Selector,
};
use reclaim_core::TypedValue;

const APPS: usize = 1000;
const MAX_CHECKS: usize = 10;
const SLOTS: [DocumentSlot; 3] = [DocumentSlot::Invoice, DocumentSlot::Receipt, DocumentSlot::EnergyCertificate];

/// Model values. Dates are day offsets from 2023-01-01.
#[derive(Debug, Clone, PartialEq)]
enum V {
    Money(i64, &'static str),
    Date(i64),
    Text(&'static str),
    Enum(&'static str),
    Power(u64),
    Num(f64),
    Tax(&'static str, bool),
}

#[derive(Debug, Clone)]
enum Cell {
    Value(V),
    Warned(V),
    Absent,
    Unreadable,
    NoKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Money,
    Date,
    Text,
    Enum,
    Power,
    Num,
    Tax,
}

const TAGS: [(&str, Kind); 8] = [
    ("amount", Kind::Money),
    ("date", Kind::Date),
    ("name", Kind::Text),
    ("class", Kind::Enum),
    ("power", Kind::Power),
    ("area", Kind::Num),
    ("nif", Kind::Tax),
    ("submission_date", Kind::Date),
];

fn random_value(rng: &mut ChaCha8Rng, kind: Kind) -> V {
    match kind {
        Kind::Money => [V::Money(10_000, "EUR"), V::Money(10_050, "EUR"), V::Money(25_000, "EUR"), V::Money(10_000, "USD")]
            .choose(rng)
            .unwrap()
            .clone(),
        Kind::Date => V::Date(*[0, 2, 10, 40].choose(rng).unwrap()),
        Kind::Text => V::Text(["Maria Silva", "MARIA  SILVA", "Maria Silvã", "Mario Silva", "João Costa"].choose(rng).unwrap()),
        Kind::Enum => V::Enum(["A+", "A", "B", "a"].choose(rng).unwrap()),
        Kind::Power => V::Power(*[1000, 1200, 1500, 2600].choose(rng).unwrap()),
        Kind::Num => V::Num(*[1000.0, 1500.0, 2.5].choose(rng).unwrap()),
        Kind::Tax => [V::Tax("123456789", true), V::Tax("123456780", false), V::Tax("500000000", true)]
            .choose(rng)
            .unwrap()
            .clone(),
    }
}

fn random_cell(rng: &mut ChaCha8Rng, kind: Kind) -> Cell {
    match rng.gen_range(0..10) {
        0..=5 => Cell::Value(random_value(rng, kind)),
        6 => Cell::Warned(random_value(rng, kind)),
        7 => Cell::Absent,
        8 => Cell::Unreadable,
        _ => Cell::NoKey,
    }
}

struct Mini {
    form: BTreeMap<&'static str, Cell>,
    /// Per slot: documents in path order, and whether an unsupported file exists.
    slots: BTreeMap<DocumentSlot, (Vec<BTreeMap<&'static str, Cell>>, bool)>,
    checks: Vec<CheckDefinition>,
    params: EvalParams,
}

fn random_selector(rng: &mut ChaCha8Rng) -> Selector {
    let tag = TAGS[rng.gen_range(0..TAGS.len() - 1)].0.to_string();
    match rng.gen_range(0..9) {
        0..=2 => Selector::Form { form: tag },
        3 => Selector::Application {
            application: ApplicationField::SubmissionDate,
        },
        _ => Selector::Doc {
            doc: *SLOTS.choose(rng).unwrap(),
            tag,
        },
    }
}

fn base_date(offset: i64) -> DateValue {
    DateValue::from_ymd(2023, 1, 1).unwrap().add_days(offset).unwrap()
}

fn random_comparator(rng: &mut ChaCha8Rng) -> Comparator {
    match rng.gen_range(0..11) {
        0 => Comparator::EqualMoney {
            tolerance_cents: *[None, Some(0), Some(50)].choose(rng).unwrap(),
        },
        1 => Comparator::EqualPower {
            tolerance_watts: *[0, 300].choose(rng).unwrap(),
        },
        2 => Comparator::DateGeq,
        3 => Comparator::DateLt,
        4 => Comparator::DateNotBefore {
            date: base_date(*[0, 5].choose(rng).unwrap()),
        },
        5 => Comparator::DateWithinDays {
            max_age_days: *[None, Some(3), Some(30)].choose(rng).unwrap(),
        },
        6 => Comparator::InRangePct {
            lo_pct: *[None, Some(120)].choose(rng).unwrap(),
            hi_pct: *[None, Some(250)].choose(rng).unwrap(),
        },
        7 => Comparator::TextMatch {
            mode: *[MatchMode::Exact, MatchMode::Fuzzy].choose(rng).unwrap(),
            threshold: *[None, Some(0.7)].choose(rng).unwrap(),
        },
        8 => Comparator::TextDiffers,
        9 => Comparator::EnumIs {
            variant: [" a ", "A+", "B"].choose(rng).unwrap().to_string(),
        },
        _ => Comparator::Present,
    }
}

fn random_condition(rng: &mut ChaCha8Rng) -> Option<Condition> {
    let operand = random_selector(rng);
    match rng.gen_range(0..6) {
        0 => Some(Condition::MoneyGt { operand, cents: 10_000 }),
        1 => Some(Condition::EnumIs {
            operand,
            variant: "a".into(),
        }),
        2 => Some(Condition::EnumNot {
            operand,
            variant: "B".into(),
        }),
        _ => None,
    }
}

fn is_unary(c: &Comparator) -> bool {
    matches!(c, Comparator::DateNotBefore { .. } | Comparator::EnumIs { .. } | Comparator::Present)
}

fn random_mini(rng: &mut ChaCha8Rng) -> Mini {
    let mut form = BTreeMap::new();
    for (t, k) in TAGS {
        if rng.gen_bool(0.85) {
            let c = random_cell(rng, k);
            if matches!(c, Cell::Value(_) | Cell::Warned(_)) {
                form.insert(t, c);
            }
        }
    }
    let mut slots = BTreeMap::new();
    for slot in SLOTS {
        let n_docs = *[0, 1, 1, 2].choose(rng).unwrap();
        let docs = (0..n_docs)
            .map(|_| TAGS.iter().map(|(t, k)| (*t, random_cell(rng, *k))).collect())
            .collect();
        slots.insert(slot, (docs, rng.gen_bool(0.3)));
    }
    let checks = (0..rng.gen_range(1..=MAX_CHECKS))
        .map(|i| {
            let comparator = random_comparator(rng);
            CheckDefinition {
                id: format!("K{i:02}"),
                report: ReportKind::CommonCore,
                description: String::new(),
                typologies: vec!["*".into()],
                when: random_condition(rng),
                lhs: random_selector(rng),
                rhs: (!is_unary(&comparator)).then(|| random_selector(rng)),
                comparator,
                source: "oracle".into(),
            }
        })
        .collect();
    let params = EvalParams {
        fuzzy_threshold: 0.85,
        amount_tolerance_cents: *[0, 100].choose(rng).unwrap(),
    };
    Mini {
        form,
        slots,
        checks,
        params,
    }
}

// ---- conversion into engine inputs ----

fn typed(v: &V) -> TypedValue {
    match v {
        V::Money(c, cur) => TypedValue::Money(Money {
            amount_cents: *c,
            currency: cur.to_string(),
        }),
        V::Date(d) => TypedValue::Date(base_date(*d)),
        V::Text(s) => TypedValue::Text(s.to_string()),
        V::Enum(s) => TypedValue::Enum(s.to_string()),
        V::Power(w) => TypedValue::Power(PowerValue { watts: *w }),
        V::Num(n) => TypedValue::Number(*n),
        V::Tax(d, ok) => TypedValue::TaxId(TaxId {
            digits: d.to_string(),
            valid: *ok,
        }),
    }
}

fn engine_inputs(m: &Mini) -> (FormData, Vec<ExtractedDocument>, Vec<UnsupportedNotice>) {
    let mut form = FormData::default();
    for (tag, cell) in &m.form {
        let field = match cell {
            Cell::Value(v) => DeclaredField {
                value: typed(v),
                raw: typed(v).to_string(),
                warning: None,
            },
            Cell::Warned(v) => DeclaredField {
                value: TypedValue::Text(typed(v).to_string()),
                raw: typed(v).to_string(),
                warning: Some("declared value did not parse".into()),
            },
            _ => continue,
        };
        form.declared.insert(tag.to_string(), field);
    }
    let mut docs = Vec::new();
    let mut notices = Vec::new();
    for (slot, (slot_docs, unsupported)) in &m.slots {
        for (i, cells) in slot_docs.iter().enumerate() {
            let rel = format!("{}/doc{i}.pdf", slot.as_str());
            let fields = cells
                .iter()
                .filter_map(|(tag, cell)| {
                    let v = match cell {
                        Cell::Value(v) => ExtractedValue::Present {
                            value: typed(v),
                            raw: typed(v).to_string(),
                            warnings: vec![],
                        },
                        Cell::Warned(v) => ExtractedValue::Present {
                            value: typed(v),
                            raw: typed(v).to_string(),
                            warnings: vec![ParseWarning::UnitAssumed],
                        },
                        Cell::Absent => ExtractedValue::Absent,
                        Cell::Unreadable => ExtractedValue::Unreadable {
                            reason: UnreadableReason::TypeMismatch,
                            raw: Some("??".into()),
                        },
                        Cell::NoKey => return None,
                    };
                    Some((tag.to_string(), v))
                })
                .collect();
            docs.push(ExtractedDocument {
                doc: DocumentRef {
                    path: PathBuf::from(&rel),
                    rel_path: rel,
                    kind: FileKind::Pdf,
                    slot: *slot,
                    origin: Origin::DirectUpload,
                },
                doc_class: None,
                fields,
                meta: ExtractionMeta {
                    backend_id: "oracle".into(),
                    elapsed_ms: 0,
                    cost_eur: 0.0,
                },
            });
        }
        if *unsupported {
            let rel = format!("{}/scan.docx", slot.as_str());
            let mut n = UnsupportedNotice::new(&PathBuf::from(&rel), rel, UnsupportedReason::UnsupportedExtension, None);
            n.slot = *slot;
            notices.push(n);
        }
    }
    docs.sort_by(|a, b| a.doc.rel_path.cmp(&b.doc.rel_path));
    (form, docs, notices)
}

// ---- the oracle ----

#[derive(Debug, Clone, PartialEq)]
enum Got {
    Value(V),
    Missing,
    Unsupported,
}

fn oracle_resolve(m: &Mini, sel: &Selector) -> Got {
    let from_form = |tag: &str| match m.form.get(tag) {
        Some(Cell::Value(v)) => Got::Value(v.clone()),
        _ => Got::Missing,
    };
    match sel {
        Selector::Form { form } => from_form(form),
        Selector::Application { .. } => from_form("submission_date"),
        Selector::Doc { doc, tag } => {
            let (docs, unsupported) = &m.slots[doc];
            if docs.is_empty() {
                return if *unsupported { Got::Unsupported } else { Got::Missing };
            }
            // The first document holding the tag decides; a warned value still counts as "holding".
            for cells in docs {
                match cells.get(tag.as_str()) {
                    Some(Cell::Value(v)) => return Got::Value(v.clone()),
                    Some(Cell::Warned(_)) => return Got::Missing,
                    _ => {}
                }
            }
            Got::Missing
        }
    }
}

/// `Some(true)` decides auto, `Some(false)` manual.
fn oracle_compare(c: &Comparator, l: &V, r: Option<&V>, p: &EvalParams) -> bool {
    let num = |v: &V| match v {
        V::Power(w) => Some(*w as f64),
        V::Num(n) => Some(*n),
        _ => None,
    };
    let text = |v: &V| match v {
        V::Text(s) | V::Enum(s) => Some(*s),
        _ => None,
    };
    // `None` means the pair cannot be compared.
    let same = |a: &V, b: &V, fuzzy: Option<f64>| -> Option<bool> {
        if let (V::Tax(x, xv), V::Tax(y, yv)) = (a, b) {
            return (*xv && *yv).then_some(x == y);
        }
        if let (Some(x), Some(y)) = (text(a), text(b)) {
            let (x, y) = (normalize_name(x), normalize_name(y));
            return Some(match fuzzy {
                None => x.canonical == y.canonical,
                Some(t) => fuzzy_score(&x, &y) >= t,
            });
        }
        match (num(a), num(b)) {
            (Some(x), Some(y)) => Some(x == y),
            _ => None,
        }
    };
    match c {
        Comparator::Present => true,
        Comparator::EnumIs { variant } => text(l).is_some_and(|s| s.trim().to_lowercase() == variant.trim().to_lowercase()),
        Comparator::DateNotBefore { date } => matches!(l, V::Date(d) if base_date(*d) >= *date),
        _ => {
            let Some(r) = r else { return false };
            match c {
                Comparator::EqualMoney { tolerance_cents } => match (l, r) {
                    (V::Money(a, ca), V::Money(b, cb)) => {
                        ca == cb && (a - b).abs() <= tolerance_cents.unwrap_or(p.amount_tolerance_cents)
                    }
                    _ => false,
                },
                Comparator::EqualPower { tolerance_watts } => match (num(l), num(r)) {
                    (Some(a), Some(b)) => (a - b).abs() <= *tolerance_watts as f64,
                    _ => false,
                },
                Comparator::DateGeq => matches!((l, r), (V::Date(a), V::Date(b)) if a >= b),
                Comparator::DateLt => matches!((l, r), (V::Date(a), V::Date(b)) if a < b),
                Comparator::DateWithinDays { max_age_days } => match (l, r, max_age_days) {
                    (V::Date(a), V::Date(b), Some(max)) => (0..=i64::from(*max)).contains(&(b - a)),
                    _ => false,
                },
                Comparator::InRangePct { lo_pct, hi_pct } => match (num(l), num(r)) {
                    (Some(v), Some(base)) => {
                        lo_pct.map_or(true, |lo| v * 100.0 >= f64::from(lo) * base)
                            && hi_pct.map_or(true, |hi| v * 100.0 <= f64::from(hi) * base)
                    }
                    _ => false,
                },
                Comparator::TextMatch { mode, threshold } => {
                    let fuzzy = (*mode == MatchMode::Fuzzy).then(|| threshold.unwrap_or(p.fuzzy_threshold));
                    same(l, r, fuzzy) == Some(true)
                }
                Comparator::TextDiffers => same(l, r, None) == Some(false),
                _ => unreachable!("unary comparators handled above"),
            }
        }
    }
}

fn oracle(m: &Mini, def: &CheckDefinition) -> CheckStatus {
    if let Some(cond) = &def.when {
        let got = oracle_resolve(m, cond.operand());
        let v = match got {
            Got::Unsupported => return CheckStatus::Unsupported,
            Got::Missing => return CheckStatus::ManualCheck,
            Got::Value(v) => v,
        };
        let holds = match (cond, &v) {
            (Condition::MoneyGt { cents, .. }, V::Money(c, _)) => c > cents,
            (Condition::EnumIs { variant, .. }, V::Enum(e)) => e.to_lowercase() == variant.to_lowercase(),
            (Condition::EnumNot { variant, .. }, V::Enum(e)) => e.to_lowercase() != variant.to_lowercase(),
            _ => return CheckStatus::ManualCheck,
        };
        if !holds {
            return CheckStatus::NotApplicable;
        }
    }
    let operands: Vec<Got> = std::iter::once(&def.lhs)
        .chain(def.rhs.as_ref())
        .map(|s| oracle_resolve(m, s))
        .collect();
    if operands.contains(&Got::Unsupported) {
        return CheckStatus::Unsupported;
    }
    let values: Vec<V> = operands
        .into_iter()
        .filter_map(|g| match g {
            Got::Value(v) => Some(v),
            _ => None,
        })
        .collect();
    if values.len() < 1 + usize::from(def.rhs.is_some()) {
        return CheckStatus::ManualCheck;
    }
    if oracle_compare(&def.comparator, &values[0], values.get(1), &m.params) {
        CheckStatus::AutoVerified
    } else {
        CheckStatus::ManualCheck
    }
}

pub fn run() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0;
    for app in 0..APPS {
        let mini = random_mini(&mut rng);
        let (form, docs, notices) = engine_inputs(&mini);
        let ctx = EvalContext {
            form: &form,
            docs: &docs,
            unsupported: &notices,
            params: mini.params,
        };
        for def in &mini.checks {
            let got = evaluate_check(def, &ctx).status;
            let want = oracle(&mini, def);
            if got != want {
                return Err(format!("app {app} check {}: engine {got:?}, oracle {want:?}\n{def:#?}", def.id));
            }
            *tally.entry(got.as_str()).or_default() += 1;
            total += 1;
        }
    }
    // Every status must actually occur, or the comparison is vacuous.
    if tally.len() < 4 {
        return Err(format!("status coverage too thin: {tally:?}"));
    }
    let parts: Vec<String> = tally.iter().map(|(k, v)| format!("{k}={v}")).collect();
    Ok(format!("{APPS} apps, {total} checks agree ({})", parts.join(" ")))
}

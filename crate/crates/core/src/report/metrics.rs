use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extract::ExtractedDocument;
use crate::ingest::DocumentSlot;
use crate::rules::{CheckOutcome, CheckStatus, ReportKind, ReportOutcomes};
use crate::typology::TypologyId;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub auto_verified: u64,
    pub manual_check: u64,
    pub not_applicable: u64,
    pub unsupported: u64,
}

impl StatusCounts {
    pub fn add(&mut self, status: CheckStatus) {
        match status {
            CheckStatus::AutoVerified => self.auto_verified += 1,
            CheckStatus::ManualCheck => self.manual_check += 1,
            CheckStatus::NotApplicable => self.not_applicable += 1,
            CheckStatus::Unsupported => self.unsupported += 1,
        }
    }

    pub fn merge(&mut self, other: &StatusCounts) {
        self.auto_verified += other.auto_verified;
        self.manual_check += other.manual_check;
        self.not_applicable += other.not_applicable;
        self.unsupported += other.unsupported;
    }

    pub fn total(&self) -> u64 {
        self.auto_verified + self.manual_check + self.not_applicable + self.unsupported
    }

    /// auto / (auto + manual + unsupported); 0 when nothing was evaluated.
    pub fn suppression(&self) -> f64 {
        let denom = self.auto_verified + self.manual_check + self.unsupported;
        if denom == 0 {
            0.0
        } else {
            self.auto_verified as f64 / denom as f64
        }
    }

    pub fn of<'a>(outcomes: impl IntoIterator<Item = &'a CheckOutcome>) -> Self {
        let mut c = Self::default();
        for o in outcomes {
            c.add(o.status);
        }
        c
    }
}

/// Report that pays for extracting a slot's documents.
pub fn cost_report(slot: DocumentSlot) -> Option<ReportKind> {
    match slot {
        DocumentSlot::PropertyRegistry | DocumentSlot::EnergyCertificate => Some(ReportKind::Eligibility),
        DocumentSlot::Invoice | DocumentSlot::Receipt => Some(ReportKind::CommonCore),
        DocumentSlot::PriorCommunication | DocumentSlot::EquipmentDatasheet => Some(ReportKind::Typology),
        DocumentSlot::Photo | DocumentSlot::Other => None,
    }
}

/// Extraction spend; cost is held in nano-euros so sums are exact and order-free.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostTime {
    pub cost_nano_eur: i64,
    pub elapsed_ms: u64,
}

impl CostTime {
    pub fn from_eur(cost_eur: f64, elapsed_ms: u64) -> Self {
        Self {
            cost_nano_eur: (cost_eur * 1e9).round() as i64,
            elapsed_ms,
        }
    }

    pub fn merge(&mut self, other: &CostTime) {
        self.cost_nano_eur += other.cost_nano_eur;
        self.elapsed_ms += other.elapsed_ms;
    }

    pub fn cost_eur(&self) -> f64 {
        self.cost_nano_eur as f64 / 1e9
    }

    pub fn elapsed_s(&self) -> f64 {
        self.elapsed_ms as f64 / 1000.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCategory {
    Correct,
    MinorError,
    FalsePositive,
    FalseNegative,
    ReadingError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub real_error: bool,
    pub minor: bool,
}

/// Classifies one labelled outcome. The false positive / false negative
/// naming follows the reviewers' convention: a false positive is a real
/// error the system let through.
pub fn classify(outcome: &CheckOutcome, label: &Label) -> ErrorCategory {
    let flagged = matches!(outcome.status, CheckStatus::ManualCheck | CheckStatus::Unsupported);
    if outcome.evidence.any_unreadable() {
        ErrorCategory::ReadingError
    } else if flagged && label.minor {
        ErrorCategory::MinorError
    } else if !flagged && label.real_error {
        ErrorCategory::FalsePositive
    } else if flagged && !label.real_error {
        ErrorCategory::FalseNegative
    } else {
        ErrorCategory::Correct
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyCounts {
    pub correct: u64,
    pub minor_error: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub reading_error: u64,
}

impl TaxonomyCounts {
    pub fn add(&mut self, c: ErrorCategory) {
        match c {
            ErrorCategory::Correct => self.correct += 1,
            ErrorCategory::MinorError => self.minor_error += 1,
            ErrorCategory::FalsePositive => self.false_positive += 1,
            ErrorCategory::FalseNegative => self.false_negative += 1,
            ErrorCategory::ReadingError => self.reading_error += 1,
        }
    }

    pub fn merge(&mut self, o: &TaxonomyCounts) {
        self.correct += o.correct;
        self.minor_error += o.minor_error;
        self.false_positive += o.false_positive;
        self.false_negative += o.false_negative;
        self.reading_error += o.reading_error;
    }

    pub fn labeled(&self) -> u64 {
        self.correct + self.minor_error + self.false_positive + self.false_negative + self.reading_error
    }
}

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("labels file: {0}")]
    Csv(String),
    #[error("labels line {line}: {problem}")]
    Row { line: u64, problem: String },
    #[error("labels reference unknown application {0}")]
    UnknownApp(String),
    #[error("labels reference unknown check {check_id} for application {app_id}")]
    UnknownCheck { app_id: String, check_id: String },
}

/// Ground truth keyed by (app_id, check_id).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Labels {
    pub entries: BTreeMap<(String, String), Label>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    app_id: String,
    check_id: String,
    real_error: String,
    #[serde(default)]
    category: Option<String>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

impl Labels {
    /// CSV with header `app_id,check_id,real_error,category`; `category` is
    /// optional and may be empty or `minor`.
    pub fn from_csv(reader: impl Read) -> Result<Self, LabelError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
        let mut entries = BTreeMap::new();
        for (i, row) in rdr.deserialize::<LabelRow>().enumerate() {
            let line = i as u64 + 2;
            let row = row.map_err(|e| LabelError::Csv(e.to_string()))?;
            let real_error = parse_bool(&row.real_error).ok_or_else(|| LabelError::Row {
                line,
                problem: format!("real_error must be true or false, found {:?}", row.real_error),
            })?;
            let minor = match row.category.as_deref().map(str::trim) {
                None | Some("") => false,
                Some(c) if c.eq_ignore_ascii_case("minor") || c.eq_ignore_ascii_case("minor_error") => true,
                Some(c) => {
                    return Err(LabelError::Row {
                        line,
                        problem: format!("unknown category {c:?}"),
                    })
                }
            };
            if entries
                .insert((row.app_id.clone(), row.check_id.clone()), Label { real_error, minor })
                .is_some()
            {
                return Err(LabelError::Row {
                    line,
                    problem: format!("duplicate label for {} {}", row.app_id, row.check_id),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for ((app_id, check_id), l) in &self.entries {
            w.serialize(LabelRow {
                app_id: app_id.clone(),
                check_id: check_id.clone(),
                real_error: l.real_error.to_string(),
                category: Some(if l.minor { "minor".into() } else { String::new() }),
            })
            .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }

    /// Fails on the first label naming an unknown application or check.
    pub fn check_known(&self, known: &BTreeMap<String, BTreeSet<String>>) -> Result<(), LabelError> {
        for (app_id, check_id) in self.entries.keys() {
            let checks = known.get(app_id).ok_or_else(|| LabelError::UnknownApp(app_id.clone()))?;
            if !checks.contains(check_id) {
                return Err(LabelError::UnknownCheck {
                    app_id: app_id.clone(),
                    check_id: check_id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn get(&self, app_id: &str, check_id: &str) -> Option<&Label> {
        self.entries.get(&(app_id.to_string(), check_id.to_string()))
    }
}

/// Per-application partial; [`MetricsSummary`] is a merge of these.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppSummary {
    pub app_id: String,
    pub typology: TypologyId,
    pub counts: StatusCounts,
    pub counts_by_report: BTreeMap<ReportKind, StatusCounts>,
    pub cost_by_report: BTreeMap<ReportKind, CostTime>,
    pub extraction: CostTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<TaxonomyCounts>,
}

impl AppSummary {
    pub fn new(app_id: &str, typology: &TypologyId, outcomes: &ReportOutcomes, docs: &[ExtractedDocument]) -> Self {
        let mut counts = StatusCounts::default();
        let mut counts_by_report = BTreeMap::new();
        for kind in ReportKind::ALL {
            let c = StatusCounts::of(outcomes.get(&kind).into_iter().flatten());
            counts.merge(&c);
            counts_by_report.insert(kind, c);
        }
        let mut cost_by_report: BTreeMap<ReportKind, CostTime> =
            ReportKind::ALL.iter().map(|k| (*k, CostTime::default())).collect();
        let mut extraction = CostTime::default();
        for d in docs {
            let ct = CostTime::from_eur(d.meta.cost_eur, d.meta.elapsed_ms);
            extraction.merge(&ct);
            if let Some(kind) = cost_report(d.doc.slot) {
                cost_by_report.get_mut(&kind).expect("seeded").merge(&ct);
            }
        }
        Self {
            app_id: app_id.to_string(),
            typology: typology.clone(),
            counts,
            counts_by_report,
            cost_by_report,
            extraction,
            taxonomy: None,
        }
    }

    /// Classifies every labelled outcome of this application.
    pub fn with_labels(mut self, outcomes: &ReportOutcomes, labels: &Labels) -> Self {
        let mut t = TaxonomyCounts::default();
        for o in outcomes.values().flatten() {
            if let Some(l) = labels.get(&self.app_id, &o.check_id) {
                t.add(classify(o, l));
            }
        }
        self.taxonomy = Some(t);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct GroupAcc {
    applications: u64,
    counts: StatusCounts,
    extraction: CostTime,
    taxonomy: Option<TaxonomyCounts>,
}

impl GroupAcc {
    fn add(&mut self, app: &AppSummary) {
        self.applications += 1;
        self.counts.merge(&app.counts);
        self.extraction.merge(&app.extraction);
        if let Some(t) = &app.taxonomy {
            self.taxonomy.get_or_insert_with(TaxonomyCounts::default).merge(t);
        }
    }

    fn finish(&self) -> GroupMetrics {
        let n = self.applications.max(1) as f64;
        GroupMetrics {
            applications: self.applications,
            checks: self.counts,
            total_checks: self.counts.total(),
            suppression_rate: self.counts.suppression(),
            cost_eur_total: self.extraction.cost_eur(),
            cost_eur_avg: self.extraction.cost_eur() / n,
            elapsed_s_total: self.extraction.elapsed_s(),
            elapsed_s_avg: self.extraction.elapsed_s() / n,
            taxonomy: self.taxonomy.map(|t| Taxonomy {
                labeled: t.labeled(),
                accuracy: if t.labeled() == 0 {
                    0.0
                } else {
                    t.correct as f64 / t.labeled() as f64
                },
                counts: t,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    #[serde(flatten)]
    pub counts: TaxonomyCounts,
    pub labeled: u64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMetrics {
    pub applications: u64,
    pub checks: StatusCounts,
    pub total_checks: u64,
    pub suppression_rate: f64,
    pub cost_eur_total: f64,
    pub cost_eur_avg: f64,
    pub elapsed_s_total: f64,
    pub elapsed_s_avg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<Taxonomy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub total: GroupMetrics,
    pub by_typology: BTreeMap<String, GroupMetrics>,
    pub by_report: BTreeMap<ReportKind, StatusCounts>,
}

/// Merges per-application partials; the result does not depend on their order.
pub fn aggregate_metrics(apps: &[AppSummary]) -> MetricsSummary {
    let mut total = GroupAcc::default();
    let mut by_typology: BTreeMap<TypologyId, GroupAcc> = BTreeMap::new();
    let mut by_report: BTreeMap<ReportKind, StatusCounts> =
        ReportKind::ALL.iter().map(|k| (*k, StatusCounts::default())).collect();
    for a in apps {
        total.add(a);
        by_typology.entry(a.typology.clone()).or_default().add(a);
        for (k, c) in &a.counts_by_report {
            by_report.entry(*k).or_default().merge(c);
        }
    }
    MetricsSummary {
        total: total.finish(),
        by_typology: by_typology.iter().map(|(t, g)| (t.to_string(), g.finish())).collect(),
        by_report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::{Evidence, EvidenceItem, OperandState};

    fn outcome(id: &str, status: CheckStatus, unreadable: bool) -> CheckOutcome {
        CheckOutcome {
            check_id: id.into(),
            description: String::new(),
            status,
            evidence: Evidence {
                condition: None,
                lhs: EvidenceItem {
                    source: "x".into(),
                    state: if unreadable { OperandState::Unreadable } else { OperandState::Present },
                    value: None,
                    detail: None,
                },
                rhs: None,
            },
            message: String::new(),
        }
    }

    #[test]
    fn suppression_definition() {
        let mut c = StatusCounts::default();
        assert_eq!(c.suppression(), 0.0);
        for s in [CheckStatus::AutoVerified, CheckStatus::AutoVerified, CheckStatus::AutoVerified, CheckStatus::ManualCheck, CheckStatus::NotApplicable] {
            c.add(s);
        }
        assert_eq!(c.suppression(), 0.75);
        let before = c.suppression();
        c.add(CheckStatus::ManualCheck);
        assert!(c.suppression() <= before);
    }

    #[test]
    fn taxonomy_precedence() {
        let no = Label { real_error: false, minor: false };
        let yes = Label { real_error: true, minor: false };
        let minor = Label { real_error: true, minor: true };
        use CheckStatus::*;
        assert_eq!(classify(&outcome("a", AutoVerified, false), &no), ErrorCategory::Correct);
        assert_eq!(classify(&outcome("a", ManualCheck, false), &yes), ErrorCategory::Correct);
        assert_eq!(classify(&outcome("a", AutoVerified, false), &yes), ErrorCategory::FalsePositive);
        assert_eq!(classify(&outcome("a", ManualCheck, false), &no), ErrorCategory::FalseNegative);
        assert_eq!(classify(&outcome("a", ManualCheck, false), &minor), ErrorCategory::MinorError);
        assert_eq!(classify(&outcome("a", ManualCheck, true), &minor), ErrorCategory::ReadingError);
    }

    #[test]
    fn labels_round_trip_and_unknowns() {
        let csv = "app_id,check_id,real_error,category\nA,C01,true,minor\nA,C02,false,\nB,C01,0\n";
        let labels = Labels::from_csv(csv.as_bytes()).unwrap();
        assert_eq!(labels.entries.len(), 3);
        assert!(labels.get("A", "C01").unwrap().minor);
        assert_eq!(Labels::from_csv(labels.to_csv().as_bytes()).unwrap(), labels);
        let mut known = BTreeMap::new();
        known.insert("A".to_string(), BTreeSet::from(["C01".to_string(), "C02".to_string()]));
        assert!(matches!(labels.check_known(&known), Err(LabelError::UnknownApp(a)) if a == "B"));
        known.insert("B".to_string(), BTreeSet::new());
        assert!(matches!(labels.check_known(&known), Err(LabelError::UnknownCheck { .. })));
        assert!(Labels::from_csv("app_id,check_id,real_error\nA,C,maybe\n".as_bytes()).is_err());
    }

    #[test]
    fn all_auto_all_clean_has_no_fp_or_fn() {
        let outcomes: ReportOutcomes = BTreeMap::from([(
            ReportKind::CommonCore,
            vec![outcome("C1", CheckStatus::AutoVerified, false), outcome("C2", CheckStatus::AutoVerified, false)],
        )]);
        let mut labels = Labels::default();
        for id in ["C1", "C2"] {
            labels.entries.insert(("A".into(), id.into()), Label { real_error: false, minor: false });
        }
        let t: TypologyId = "1".parse().unwrap();
        let app = AppSummary::new("A", &t, &outcomes, &[]).with_labels(&outcomes, &labels);
        let m = aggregate_metrics(&[app]);
        let tax = m.total.taxonomy.unwrap();
        assert_eq!((tax.counts.false_positive, tax.counts.false_negative), (0, 0));
        assert_eq!(tax.accuracy, 1.0);
        assert_eq!(m.total.suppression_rate, 1.0);
    }

    #[test]
    fn merge_is_order_free() {
        let t1: TypologyId = "1".parse().unwrap();
        let t4: TypologyId = "4".parse().unwrap();
        let mk = |id: &str, t: &TypologyId, s: CheckStatus| {
            let outcomes: ReportOutcomes = BTreeMap::from([(ReportKind::Typology, vec![outcome("T", s, false)])]);
            AppSummary::new(id, t, &outcomes, &[])
        };
        let apps = vec![
            mk("a", &t1, CheckStatus::AutoVerified),
            mk("b", &t4, CheckStatus::ManualCheck),
            mk("c", &t1, CheckStatus::Unsupported),
        ];
        let mut rev = apps.clone();
        rev.reverse();
        assert_eq!(aggregate_metrics(&apps), aggregate_metrics(&rev));
        let m = aggregate_metrics(&apps);
        assert_eq!(m.by_typology["1"].applications, 2);
        assert_eq!(m.total.total_checks, 3);
        assert_eq!(m.by_report[&ReportKind::Typology].total(), 3);
    }
}

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::metrics::{AppSummary, CostTime};
use crate::rules::ReportKind;
use crate::typology::TypologyId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub report: String,
    pub cost_eur: f64,
    pub time_s: f64,
}

/// Average extraction cost and time per application, split by report.
///
/// Typology rows average the typology-report spend of that typology's
/// applications; "All Typologies Avg." averages it over every application;
/// the total is the sum of the three per-report averages.
pub fn cost_time_summary(apps: &[AppSummary]) -> Vec<CostRow> {
    let mut rows = Vec::new();
    if apps.is_empty() {
        rows.push(CostRow {
            report: "Total".into(),
            cost_eur: 0.0,
            time_s: 0.0,
        });
        return rows;
    }
    let avg = |items: &[&AppSummary], kind: ReportKind| -> (f64, f64) {
        let mut sum = CostTime::default();
        for a in items {
            if let Some(ct) = a.cost_by_report.get(&kind) {
                sum.merge(ct);
            }
        }
        let n = items.len() as f64;
        (sum.cost_eur() / n, sum.elapsed_s() / n)
    };
    let mut by_typology: BTreeMap<TypologyId, Vec<&AppSummary>> = BTreeMap::new();
    for a in apps {
        by_typology.entry(a.typology.clone()).or_default().push(a);
    }
    for (t, items) in &by_typology {
        let (c, s) = avg(items, ReportKind::Typology);
        rows.push(CostRow {
            report: format!("Typology {t}"),
            cost_eur: c,
            time_s: s,
        });
    }
    let all: Vec<&AppSummary> = apps.iter().collect();
    let mut total = (0.0, 0.0);
    for (label, kind) in [
        ("All Typologies Avg.", ReportKind::Typology),
        ("Eligibility", ReportKind::Eligibility),
        ("Common Core", ReportKind::CommonCore),
    ] {
        let (c, s) = avg(&all, kind);
        total = (total.0 + c, total.1 + s);
        rows.push(CostRow {
            report: label.into(),
            cost_eur: c,
            time_s: s,
        });
    }
    rows.push(CostRow {
        report: "Total".into(),
        cost_eur: total.0,
        time_s: total.1,
    });
    rows
}

/// `report,cost_eur,time_s` with both values at two decimals.
pub fn cost_time_csv(rows: &[CostRow]) -> String {
    let mut out = String::from("report,cost_eur,time_s\n");
    for r in rows {
        out.push_str(&format!("{},{:.2},{:.2}\n", r.report, r.cost_eur, r.time_s));
    }
    out
}

/// Before/after comparison of one indicator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub metric: String,
    pub before: f64,
    pub after: f64,
}

/// Decimal places needed to print `x` exactly (at most 6).
fn decimals(x: f64) -> usize {
    (0..=6)
        .find(|d| {
            let scale = 10f64.powi(*d as i32);
            ((x * scale).round() / scale - x).abs() < 1e-9
        })
        .unwrap_or(6)
}

/// `metric,before,after,delta` where delta is printed at the precision of its inputs.
pub fn delta_table(rows: &[DeltaRow]) -> String {
    let mut out = String::from("metric,before,after,delta\n");
    for r in rows {
        let d = decimals(r.before).max(decimals(r.after));
        let delta = r.after - r.before;
        let delta = if delta.abs() < 0.5 * 10f64.powi(-(d as i32)) { 0.0 } else { delta };
        out.push_str(&format!(
            "{},{:.d$},{:.d$},{:+.d$}\n",
            r.metric,
            r.before,
            r.after,
            delta,
            d = d
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::ReportOutcomes;

    fn app(id: &str, t: &str, costs: [(f64, u64); 3]) -> AppSummary {
        let mut a = AppSummary::new(id, &t.parse().unwrap(), &ReportOutcomes::new(), &[]);
        for (kind, (c, ms)) in ReportKind::ALL.iter().zip(costs) {
            a.cost_by_report.insert(*kind, CostTime::from_eur(c, ms));
        }
        a
    }

    #[test]
    fn single_app_total_row() {
        let rows = cost_time_summary(&[app("a", "1", [(0.01, 13_000), (0.02, 29_000), (0.06, 48_000)])]);
        let csv = cost_time_csv(&rows);
        assert!(csv.ends_with("Total,0.09,90.00\n"), "{csv}");
        assert!(csv.contains("Typology 1,0.06,48.00\n"));
    }

    #[test]
    fn zero_apps() {
        assert_eq!(cost_time_csv(&cost_time_summary(&[])), "report,cost_eur,time_s\nTotal,0.00,0.00\n");
    }

    #[test]
    fn typology_average() {
        let apps = [
            app("a", "1", [(0.0, 0), (0.0, 0), (0.05, 37_000)]),
            app("b", "1", [(0.0, 0), (0.0, 0), (0.05, 37_000)]),
        ];
        let csv = cost_time_csv(&cost_time_summary(&apps));
        assert!(csv.contains("Typology 1,0.05,37.00\n"));
    }

    #[test]
    fn delta_rendering() {
        let t = delta_table(&[
            DeltaRow { metric: "clarifications".into(), before: 2.13, after: 2.05 },
            DeltaRow { metric: "appeals_pct".into(), before: 25.8, after: 20.4 },
        ]);
        assert_eq!(t, "metric,before,after,delta\nclarifications,2.13,2.05,-0.08\nappeals_pct,25.8,20.4,-5.4\n");
    }
}

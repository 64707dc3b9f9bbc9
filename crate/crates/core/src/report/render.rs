use std::fmt::Write as _;

use html_escape::encode_text;
use serde::{Deserialize, Serialize};

use crate::ingest::UnsupportedNotice;
use crate::rules::{CheckOutcome, CheckStatus, EvidenceItem, ReportKind};
use crate::typology::TypologyId;

/// One of the three per-application reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub app_id: String,
    pub typology: TypologyId,
    pub kind: ReportKind,
    pub catalog_version: String,
    pub outcomes: Vec<CheckOutcome>,
    pub unsupported_notices: Vec<UnsupportedNotice>,
    /// Kept out of the JSON body; see [`render_json`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

impl ReportDocument {
    pub fn count(&self, status: CheckStatus) -> usize {
        self.outcomes.iter().filter(|o| o.status == status).count()
    }
}

/// Canonical JSON: sorted keys, two-space indent, trailing newline. A
/// `generated_at` stamp, when set, is written as a separate top-level
/// `meta` object so the body bytes stay comparable across runs.
pub fn render_json(report: &ReportDocument) -> Vec<u8> {
    let mut body = report.clone();
    let stamp = body.generated_at.take();
    let mut value = serde_json::to_value(&body).expect("report serialises");
    if let (Some(stamp), Some(obj)) = (stamp, value.as_object_mut()) {
        obj.insert("meta".into(), serde_json::json!({ "generated_at": stamp }));
    }
    let mut out = serde_json::to_vec_pretty(&value).expect("value serialises");
    out.push(b'\n');
    out
}

/// Reads a report back; the inverse of [`render_json`] up to `generated_at`.
pub fn parse_report_json(bytes: &[u8]) -> Result<ReportDocument, serde_json::Error> {
    let mut value: serde_json::Value = serde_json::from_slice(bytes)?;
    let stamp = value
        .as_object_mut()
        .and_then(|o| o.remove("meta"))
        .and_then(|m| m.get("generated_at").and_then(|g| g.as_str()).map(str::to_string));
    let mut report: ReportDocument = serde_json::from_value(value)?;
    report.generated_at = stamp;
    Ok(report)
}

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse;width:100%}\
th,td{border:1px solid #ccc;padding:6px;text-align:left;vertical-align:top}\
th{background:#f0f0f0}\
tr.manual{background:#fde2e2}\
tr.manual .badge{background:#c62828;color:#fff}\
tr.auto .badge{background:#2e7d32;color:#fff}\
tr.unsupported .badge{background:#ef6c00;color:#fff}\
tr.na{color:#777}\
.badge{display:inline-block;padding:2px 6px;border-radius:3px;background:#999;color:#fff;font-size:0.9em}\
.banner{padding:10px;margin:1em 0;background:#e8f5e9;border:1px solid #2e7d32}\
.src{color:#555;font-size:0.85em}";

fn status_class(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::AutoVerified => "auto",
        CheckStatus::ManualCheck => "manual",
        CheckStatus::NotApplicable => "na",
        CheckStatus::Unsupported => "unsupported",
    }
}

fn evidence_cell(item: Option<&EvidenceItem>) -> String {
    let Some(item) = item else {
        return String::from("&ndash;");
    };
    let mut cell = String::new();
    match &item.value {
        Some(v) => cell.push_str(&encode_text(v)),
        None => cell.push_str("<em>none</em>"),
    }
    let _ = write!(cell, "<div class=\"src\">{}", encode_text(&item.source));
    if let Some(d) = &item.detail {
        let _ = write!(cell, " ({})", encode_text(d));
    }
    cell.push_str("</div>");
    cell
}

/// Self-contained HTML page: inline styles, no external resources.
pub fn render_html(report: &ReportDocument) -> Vec<u8> {
    let mut h = String::new();
    let title = format!("{} report: application {}", report.kind.title(), report.app_id);
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n",
        encode_text(&title)
    );
    let _ = writeln!(h, "<h1>{}</h1>", encode_text(&title));
    let _ = writeln!(
        h,
        "<p>Typology {} ({}) &middot; catalog {}</p>",
        report.typology,
        encode_text(report.typology.major_name()),
        encode_text(&report.catalog_version)
    );
    let flagged = report.count(CheckStatus::ManualCheck) + report.count(CheckStatus::Unsupported);
    if report.outcomes.is_empty() {
        h.push_str("<p class=\"banner\">No checks apply to this report.</p>\n");
    } else if flagged == 0 {
        h.push_str("<p class=\"banner\">No verification needed</p>\n");
    } else {
        let _ = writeln!(h, "<p>{flagged} of {} checks need a reviewer.</p>", report.outcomes.len());
    }

    h.push_str("<table>\n<thead><tr><th>Check</th><th>Description</th><th>Declared / first value</th><th>Compared value</th><th>Status</th><th>Message</th></tr></thead>\n<tbody>\n");
    for o in &report.outcomes {
        let _ = writeln!(
            h,
            "<tr class=\"row {}\"><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td><span class=\"badge\">{}</span></td><td>{}</td></tr>",
            status_class(o.status),
            encode_text(&o.check_id),
            encode_text(&o.description),
            evidence_cell(Some(&o.evidence.lhs)),
            evidence_cell(o.evidence.rhs.as_ref()),
            o.status.label(),
            encode_text(&o.message),
        );
    }
    h.push_str("</tbody>\n</table>\n");

    h.push_str("<h2>Unsupported files</h2>\n");
    if report.unsupported_notices.is_empty() {
        h.push_str("<p>None.</p>\n");
    } else {
        h.push_str("<ul class=\"unsupported-files\">\n");
        for n in &report.unsupported_notices {
            let _ = writeln!(h, "<li>{}</li>", encode_text(&n.message));
        }
        h.push_str("</ul>\n");
    }
    h.push_str("</body>\n</html>\n");
    h.into_bytes()
}

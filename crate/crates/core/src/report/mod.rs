//! Per-application reports and corpus-level metrics.

mod cost;
mod metrics;
mod render;

pub use cost::{cost_time_csv, cost_time_summary, delta_table, CostRow, DeltaRow};
pub use metrics::{
    aggregate_metrics, classify, cost_report, AppSummary, CostTime, ErrorCategory, GroupMetrics, Label, LabelError,
    Labels, MetricsSummary, StatusCounts, Taxonomy, TaxonomyCounts,
};
pub use render::{parse_report_json, render_html, render_json, ReportDocument};

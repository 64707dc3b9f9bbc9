//! Automated pre-screening of reimbursement-claim bundles.
//!
//! The pipeline loads application bundles ([`ingest`]), pulls fixed tag
//! sets out of each supporting document ([`extract`]), runs tri-state
//! consistency checks ([`rules`]) and renders reports and metrics
//! ([`report`]).

pub mod extract;
pub mod ingest;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod rules;
pub mod synth;
pub mod textmetrics;
pub mod typology;
pub mod value;

pub use typology::TypologyId;
pub use value::TypedValue;

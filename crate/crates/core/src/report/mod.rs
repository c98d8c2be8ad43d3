//! Classifier metrics, the majority-class baseline and graph export.

mod dot;
mod metrics;

pub use dot::{export_dot, used_inputs};
pub use metrics::{compute_metrics, majority_baseline, roc_auc, Confusion, MetricsBundle};

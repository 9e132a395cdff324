//! Metrics, cross-validation, ratio sweeps, method comparison and paired
//! t-tests.

mod auc;
mod confusion;
mod cv;
mod stats;
mod sweep;

pub use auc::auc_roc;
pub use confusion::{confusion, metrics, ConfusionMatrix, Metric, MetricValue, Metrics, UndefinedReason};
pub use cv::{
    cross_validate, cross_validate_xy, evaluate, summarize, summarize_values, CvOptions, CvReport, FoldResult,
    MetricSummary,
};
pub use stats::{inc_beta, ln_gamma, mean_sd, paired_t_test, self_taught_accuracy, t_two_sided_p, TTestResult};
pub use sweep::{
    accuracy_on, compare_methods, paired_cell, ratio_sweep, CompareSpec, ComparisonReport, Method, MethodResult,
    PairedRow, ProtocolOptions, SweepReport, SweepRow, TestCell,
};

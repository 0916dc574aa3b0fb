//! Correlation meta-analysis: per-test Pearson and Kendall coefficients,
//! significance, Fisher-z aggregation over tests and ranked reports.

mod aggregate;
mod correlation;
mod fisher;
mod report;
mod significance;

pub use aggregate::{aggregate, aggregate_diff_significant, aggregate_diff_statistic, AggregatedScore, TestCoefficient};
pub use correlation::{kendall, kendall_direct, pearson, tau_prime, PairedScores};
pub use fisher::{clip_for_fisher, fisher_z, fisher_z_inv, FISHER_CLIP};
pub use report::{build_report, format_percent, CellStatus, CorrelationCell, CorrelationReport, ReportRow};
pub use significance::{corr_significance, CorrelationKind, ALPHA, Z_CRITICAL};

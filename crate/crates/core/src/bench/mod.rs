//! Error metrics, convergence tables, mesh statistics and timing comparisons.

mod layers;
mod metrics;
mod render;
mod report;
mod timing;

pub use layers::{layer_report, LayerCell, LayerTable};
pub use metrics::{convergence_order, interpolant_error, nodal_error};
pub use render::{format_float, render, to_csv, to_json, to_markdown, Format, CSV_HEADER};
pub use report::{
    run_report, Algorithm, CellFailure, ConvergenceRow, Metric, Report, ReportConfig,
};
pub use timing::{timing_comparison, timing_csv, timing_markdown, TimingRow};

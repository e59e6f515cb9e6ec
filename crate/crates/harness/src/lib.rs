//! Experiment harness for the fractional LMS system-identification
//! benchmark: configuration loading, the SNR × algorithm Monte-Carlo grid,
//! CSV/JSON reports, SVG learning-curve plots and comparison against a
//! reference table.

pub mod compare;
pub mod config;
mod error;
pub mod experiment;
pub mod plot;

pub use compare::{compare_to_reference, CellVerdict, Comparison};
pub use config::{AlgorithmSpec, ExperimentConfig, MetricsConfig, PlantConfig};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, run_grid, CellResult, ExperimentManifest, RunOptions};
pub use plot::{emit_plot, PlotCurve, PlotKind};

/// Column header of the per-cell curve files.
pub const CURVES_HEADER: &str = "iteration,mse_db,nwd_db";
/// Column header of the summary file.
pub const SUMMARY_HEADER: &str =
    "algorithm,snr_db,steady_mse_db,mse_conv_iter,steady_nwd_db,nwd_conv_iter,runs_used,runs_diverged";
/// Column header of a reference table.
pub const REFERENCE_HEADER: &str =
    "algorithm,snr_db,mse_conv_iter,steady_mse_db,nwd_conv_iter,steady_nwd_db,time_s";

/// `10` for integral values, `12p5` otherwise; used in file names.
pub fn snr_tag(snr_db: f64) -> String {
    if snr_db.fract() == 0.0 {
        format!("{}", snr_db as i64)
    } else {
        format!("{snr_db}").replace('.', "p").replace('-', "m")
    }
}

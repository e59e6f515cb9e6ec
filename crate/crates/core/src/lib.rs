//! Fractional-order LMS adaptive filtering.
//!
//! This crate implements three stochastic-gradient adaptive FIR filters:
//!
//! - **LMS**: `w(n+1) = w(n) + ν e(n) x(n)`
//! - **FLMS**: LMS plus a fractional-order gradient term,
//!   `w(n+1) = w(n) + ν e x + ν_f e x w^{1-f} / Γ(2-f)`
//! - **RVSS-FLMS**: FLMS with the coupling `ν_f = ν Γ(2-f)` and a robust
//!   variable step size driven by the error-energy correlation,
//!   `w(n+1) = w(n) + ν(n) e x (1 + w^{1-f})`
//!
//! together with a system-identification simulator (BPSK excitation through
//! an FIR plant with calibrated Gaussian disturbance) and the ensemble
//! metrics used to compare the algorithms (MSE and normalized weight
//! difference learning curves).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the experiment
//! harness uses.

mod error;
pub mod filter;
pub mod gamma;
pub mod metrics;
mod scalar;
pub mod sim;
pub mod stepsize;

pub use error::{Error, Result};
pub use filter::{
    cost, flms_step, frac_power, fractional_gradient, integer_gradient, lms_step, predict,
    rvss_flms_step, rvss_weight_increment, Algorithm, FilterConfig, FilterKernel, FilterState,
    FracPowerPolicy, Regressor,
};
pub use gamma::gamma;
pub use metrics::{
    convergence_iteration, ensemble_mse_db, ensemble_nwd_db, nwd_db, steady_state_level,
    EnsembleReport, IndexedRun, DB_FLOOR,
};
pub use scalar::Scalar;
pub use sim::{
    bpsk_sequence, clean_plant_power, plant_output, run_identification, snr_to_variance, train,
    PlantSpec, Recording, RunSeries, RunStreams, StreamRole, TrainingSet,
};
pub use stepsize::{update_correlation, update_step_size, StepSizeParams};

/// Double-precision filter configuration.
pub type FilterConfigF64 = FilterConfig<f64>;
/// Double-precision filter state.
pub type FilterStateF64 = FilterState<f64>;
/// Double-precision regressor.
pub type RegressorF64 = Regressor<f64>;
/// Double-precision plant.
pub type PlantSpecF64 = PlantSpec<f64>;
/// Double-precision run series.
pub type RunSeriesF64 = RunSeries<f64>;
/// Double-precision ensemble report.
pub type EnsembleReportF64 = EnsembleReport<f64>;

/// Single-precision filter configuration.
pub type FilterConfigF32 = FilterConfig<f32>;
/// Single-precision filter state.
pub type FilterStateF32 = FilterState<f32>;

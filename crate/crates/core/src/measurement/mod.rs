//! Counting statistics and data reduction: Poisson count simulation,
//! sinusoidal fringe fits, the count-ratio estimators for the three
//! correlation terms, and the reduced inequality.

mod analysis;
mod counts;
mod estimate;
mod fit;

use thiserror::Error;

use crate::interferometer::{Context, InterferometerError};

pub use analysis::{analyze, group_scans, simulate_experiment, AnalysisReport, ScanFit, SimulationPlan};
pub use counts::{
    read_counts_csv, simulate_counts, write_counts_csv, CountRecord, CountSimulator, COUNTS_HEADER,
};
pub use estimate::{
    evaluate_inequality, expectation_bell, expectation_from_counts, expectation_with_covariance,
    ExpectationEstimate, InequalityResult, REDUCED_BOUND,
};
pub use fit::{counts_at, fit_fringe, ExtractedRate, FringeFit};

/// Expected counts at the unpolarized fringe mean per setting.
pub const DEFAULT_FLUX_EXPOSURE: f64 = 2e4;
/// χ points per scan, over two periods.
pub const DEFAULT_SCAN_POINTS: usize = 16;

#[derive(Debug, Error)]
pub enum MeasurementError {
    #[error("invalid rate {0}: must be finite and non-negative")]
    InvalidRate(f64),
    #[error("invalid flux or exposure {0}: must be finite and positive")]
    InvalidExposure(f64),
    #[error("insufficient data for a fringe fit: {0}")]
    InsufficientData(String),
    #[error("fringe design matrix is singular (aliased χ values)")]
    DegenerateDesign,
    #[error("estimator denominator is zero")]
    ZeroTotal,
    #[error("term labels {found:?} do not match the expected {expected:?}")]
    LabelMismatch { expected: [Context; 3], found: [Context; 3] },
    #[error("no scan covers the `{}` context", .0.as_str())]
    MissingContext(Context),
    #[error("count data schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Interferometer(#[from] InterferometerError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

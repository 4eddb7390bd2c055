use serde::{Deserialize, Serialize};

use super::MeasurementError;
use crate::interferometer::Context;

/// Classical bound of the reduced three-term inequality.
pub const REDUCED_BOUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub std_error: f64,
    pub term_label: Context,
}

/// `(n₀ + n₁ − n₂ − n₃) / Σn` with first-order error propagation through an
/// arbitrary covariance of the four inputs.
///
/// ∂E/∂nᵢ = (sᵢ − E)/Σn with sᵢ = ±1 the outcome sign.
pub fn expectation_with_covariance(
    term: Context,
    counts: [f64; 4],
    covariance: [[f64; 4]; 4],
) -> Result<ExpectationEstimate, MeasurementError> {
    for &n in &counts {
        if !n.is_finite() || n < 0.0 {
            return Err(MeasurementError::InvalidRate(n));
        }
    }
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return Err(MeasurementError::ZeroTotal);
    }
    const SIGNS: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
    let value = (counts[0] + counts[1] - counts[2] - counts[3]) / total;
    let grad = SIGNS.map(|s| (s - value) / total);
    let mut variance = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            variance += grad[i] * covariance[i][j] * grad[j];
        }
    }
    Ok(ExpectationEstimate {
        value: value.clamp(-1.0, 1.0),
        std_error: variance.max(0.0).sqrt(),
        term_label: term,
    })
}

fn poisson_covariance(counts: [f64; 4]) -> [[f64; 4]; 4] {
    let mut cov = [[0.0; 4]; 4];
    for k in 0..4 {
        cov[k][k] = counts[k];
    }
    cov
}

/// Joint spin/path estimator from `N(α,χ)`, `N(α+π,χ+π)`, `N(α+π,χ)`,
/// `N(α,χ+π)`, each treated as an independent Poisson count.
pub fn expectation_from_counts(
    term: Context,
    n_00: f64,
    n_pp: f64,
    n_p0: f64,
    n_0p: f64,
) -> Result<ExpectationEstimate, MeasurementError> {
    let counts = [n_00, n_pp, n_p0, n_0p];
    expectation_with_covariance(term, counts, poisson_covariance(counts))
}

/// Bell-discrimination estimator: the correlated-family channels count as
/// +1, the anticorrelated-family channels (where the Bell-like state lives)
/// as −1.
pub fn expectation_bell(
    n_corr_plus: f64,
    n_corr_minus: f64,
    n_anti_plus: f64,
    n_anti_minus: f64,
) -> Result<ExpectationEstimate, MeasurementError> {
    let counts = [n_corr_plus, n_corr_minus, n_anti_plus, n_anti_minus];
    expectation_with_covariance(Context::Bell, counts, poisson_covariance(counts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityResult {
    pub terms: [ExpectationEstimate; 3],
    pub lhs: f64,
    pub lhs_error: f64,
    pub bound: f64,
    pub violated: bool,
    /// `(lhs − bound) / lhs_error`; infinite for error-free input.
    pub sigma_distance: f64,
}

/// `−⟨xx⟩ − ⟨yy⟩ − ⟨bell⟩ ≤ 1`, term errors combined in quadrature.
pub fn evaluate_inequality(
    xx: ExpectationEstimate,
    yy: ExpectationEstimate,
    bell: ExpectationEstimate,
) -> Result<InequalityResult, MeasurementError> {
    let expected = [Context::Xx, Context::Yy, Context::Bell];
    let found = [xx.term_label, yy.term_label, bell.term_label];
    if found != expected {
        return Err(MeasurementError::LabelMismatch { expected, found });
    }
    let terms = [xx, yy, bell];
    let lhs = -xx.value - yy.value - bell.value;
    let lhs_error = terms.iter().map(|t| t.std_error * t.std_error).sum::<f64>().sqrt();
    let excess = lhs - REDUCED_BOUND;
    let sigma_distance = if lhs_error > 0.0 {
        excess / lhs_error
    } else if excess == 0.0 {
        0.0
    } else {
        excess.signum() * f64::INFINITY
    };
    Ok(InequalityResult {
        terms,
        lhs,
        lhs_error,
        bound: REDUCED_BOUND,
        violated: lhs > REDUCED_BOUND,
        sigma_distance,
    })
}

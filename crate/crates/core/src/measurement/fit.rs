//! Weighted linear least squares for `A + B·cos(χ + φ)`.
//!
//! The model is fitted in its linear form `A + C·cos χ + S·sin χ`, so that
//! `B = √(C² + S²)` and `φ = atan2(−S, C)`. Rates are `counts / exposure`
//! with Poisson variance `max(counts, 1) / exposure²`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{CountRecord, MeasurementError};

/// Relative amplitude below which the phase is reported as unconstrained.
const FLAT_FRINGE_RELATIVE: f64 = 1e-9;
/// Smallest accepted eigenvalue ratio of the normal matrix.
const MIN_CONDITION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFit {
    #[serde(rename = "offset_A")]
    pub offset_a: f64,
    #[serde(rename = "amplitude_B")]
    pub amplitude_b: f64,
    pub phase_phi: f64,
    /// Covariance of `(A, B, φ)`; the φ entries are infinite when the
    /// amplitude vanishes.
    pub covariance: [[f64; 3]; 3],
    pub cos_coefficient: f64,
    pub sin_coefficient: f64,
    /// Covariance of the linear parameters `(A, C, S)`.
    pub linear_covariance: [[f64; 3]; 3],
    pub chi_squared: f64,
    pub dof: usize,
    pub phase_unconstrained: bool,
}

fn design(chi: f64) -> Vector3<f64> {
    Vector3::new(1.0, chi.cos(), chi.sin())
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = m[(r, c)];
        }
    }
    out
}

fn check_coverage(samples: &[CountRecord]) -> Result<(), MeasurementError> {
    if samples.len() < 4 {
        return Err(MeasurementError::InsufficientData(format!(
            "{} samples, need at least 4",
            samples.len()
        )));
    }
    let mut angles: Vec<f64> = samples.iter().map(|s| s.chi.rem_euclid(2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    if angles.len() > 1 && (angles[0] + 2.0 * PI - angles[angles.len() - 1]) < 1e-9 {
        angles.pop();
    }
    if angles.len() < 3 {
        return Err(MeasurementError::InsufficientData(format!(
            "{} distinct phases, need at least 3",
            angles.len()
        )));
    }
    let mut widest_gap = angles[0] + 2.0 * PI - angles[angles.len() - 1];
    for w in angles.windows(2) {
        widest_gap = widest_gap.max(w[1] - w[0]);
    }
    if 2.0 * PI - widest_gap <= PI {
        return Err(MeasurementError::InsufficientData(
            "phases span no more than half a period".to_owned(),
        ));
    }
    Ok(())
}

pub fn fit_fringe(samples: &[CountRecord]) -> Result<FringeFit, MeasurementError> {
    check_coverage(samples)?;
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for s in samples {
        if !(s.exposure.is_finite() && s.exposure > 0.0) {
            return Err(MeasurementError::InvalidExposure(s.exposure));
        }
        let x = design(s.chi);
        let w = s.exposure * s.exposure / (s.counts.max(1) as f64);
        normal += w * x * x.transpose();
        rhs += w * s.rate() * x;
    }
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !hi.is_finite() || hi <= 0.0 || lo / hi < MIN_CONDITION {
        return Err(MeasurementError::DegenerateDesign);
    }
    let chol = normal.cholesky().ok_or(MeasurementError::DegenerateDesign)?;
    let theta = chol.solve(&rhs);
    let lin_cov = chol.inverse();

    let chi_squared = samples
        .iter()
        .map(|s| {
            let w = s.exposure * s.exposure / (s.counts.max(1) as f64);
            let r = s.rate() - design(s.chi).dot(&theta);
            w * r * r
        })
        .sum();

    let (a, c, sn) = (theta[0], theta[1], theta[2]);
    let b = c.hypot(sn);
    let flat = b <= FLAT_FRINGE_RELATIVE * a.abs().max(f64::MIN_POSITIVE);
    let mut covariance = [[0.0; 3]; 3];
    let (amplitude_b, phase_phi) = if flat {
        covariance[0][0] = lin_cov[(0, 0)];
        covariance[1][1] = lin_cov[(1, 1)].max(lin_cov[(2, 2)]);
        covariance[2][2] = f64::INFINITY;
        (0.0, 0.0)
    } else {
        // ∂(A, B, φ)/∂(A, C, S)
        let jac = Matrix3::new(
            1.0, 0.0, 0.0,
            0.0, c / b, sn / b,
            0.0, sn / (b * b), -c / (b * b),
        );
        covariance = to_array(&(jac * lin_cov * jac.transpose()));
        (b, (-sn).atan2(c))
    };

    Ok(FringeFit {
        offset_a: a,
        amplitude_b,
        phase_phi,
        covariance,
        cos_coefficient: c,
        sin_coefficient: sn,
        linear_covariance: to_array(&lin_cov),
        chi_squared,
        dof: samples.len() - 3,
        phase_unconstrained: flat,
    })
}

/// A fitted rate read off at one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractedRate {
    pub chi: f64,
    pub value: f64,
    pub variance: f64,
    /// Set when the fitted curve was negative and the value clipped to 0.
    pub clipped: bool,
}

impl FringeFit {
    pub fn value_at(&self, chi: f64) -> f64 {
        design(chi).dot(&Vector3::new(self.offset_a, self.cos_coefficient, self.sin_coefficient))
    }

    /// Covariance of the fitted values at two phases.
    pub fn covariance_between(&self, chi1: f64, chi2: f64) -> f64 {
        let m = Matrix3::from_fn(|r, c| self.linear_covariance[r][c]);
        design(chi1).dot(&(m * design(chi2)))
    }

    pub fn contrast(&self) -> f64 {
        self.amplitude_b / self.offset_a
    }

    pub fn amplitude_error(&self) -> f64 {
        self.covariance[1][1].sqrt()
    }
}

/// The fitted curve at χ, clipped at zero.
pub fn counts_at(fit: &FringeFit, chi: f64) -> ExtractedRate {
    let raw = fit.value_at(chi);
    ExtractedRate {
        chi,
        value: raw.max(0.0),
        variance: fit.covariance_between(chi, chi),
        clipped: raw < 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{Context, Rotator};

    fn sample(chi: f64, rate: f64) -> CountRecord {
        CountRecord {
            context: Context::Xx,
            alpha: 0.0,
            chi,
            rotator: Rotator::PiHalf,
            counts: 0,
            exposure: 1.0,
        }
        .with_rate(rate)
    }

    impl CountRecord {
        /// Noise-free record whose rate is exactly `rate` (exposure chosen to fit).
        fn with_rate(mut self, rate: f64) -> Self {
            // integer counts force a matching exposure
            self.counts = 1_000_000;
            self.exposure = self.counts as f64 / rate;
            self
        }
    }

    fn grid(n: usize, periods: f64) -> Vec<f64> {
        (0..n).map(|k| periods * 2.0 * PI * k as f64 / n as f64).collect()
    }

    #[test]
    fn exact_recovery() {
        let samples: Vec<_> = grid(16, 2.0).into_iter().map(|x| sample(x, 10.0 + 5.0 * (x + 0.3).cos())).collect();
        let fit = fit_fringe(&samples).unwrap();
        assert!((fit.offset_a - 10.0).abs() < 1e-9);
        assert!((fit.amplitude_b - 5.0).abs() < 1e-9);
        assert!((fit.phase_phi - 0.3).abs() < 1e-9);
        assert!(fit.chi_squared < 1e-12);
        assert_eq!(fit.dof, 13);
    }

    #[test]
    fn flat_fringe_reports_unconstrained_phase() {
        let samples: Vec<_> = grid(12, 1.0).into_iter().map(|x| sample(x, 10.0)).collect();
        let fit = fit_fringe(&samples).unwrap();
        assert_eq!(fit.amplitude_b, 0.0);
        assert_eq!(fit.phase_phi, 0.0);
        assert!(fit.phase_unconstrained);
        assert!(fit.covariance[2][2].is_infinite());
        assert!((counts_at(&fit, 1.0).value - 10.0).abs() < 1e-9);
    }

    #[test]
    fn dashed_line_extraction() {
        let samples: Vec<_> = grid(16, 2.0).into_iter().map(|x| sample(x, 10.0 + 5.0 * x.cos())).collect();
        let fit = fit_fringe(&samples).unwrap();
        assert!((counts_at(&fit, 0.0).value - 15.0).abs() < 1e-9);
        assert!((counts_at(&fit, PI).value - 5.0).abs() < 1e-9);
    }

    #[test]
    fn negative_curve_is_clipped() {
        let fit = FringeFit {
            offset_a: 1.0,
            amplitude_b: 2.0,
            phase_phi: 0.0,
            covariance: [[0.0; 3]; 3],
            cos_coefficient: 2.0,
            sin_coefficient: 0.0,
            linear_covariance: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            chi_squared: 0.0,
            dof: 1,
            phase_unconstrained: false,
        };
        let e = counts_at(&fit, PI);
        assert!(e.clipped);
        assert_eq!(e.value, 0.0);
        assert!((e.variance - 2.0).abs() < 1e-12);
        assert!(!counts_at(&fit, 0.0).clipped);
    }

    #[test]
    fn insufficient_and_aliased_data() {
        let three: Vec<_> = grid(3, 1.0).into_iter().map(|x| sample(x, 5.0)).collect();
        assert!(matches!(fit_fringe(&three), Err(MeasurementError::InsufficientData(_))));
        let two_phases: Vec<_> = [0.0, PI, 2.0 * PI, 3.0 * PI].into_iter().map(|x| sample(x, 5.0)).collect();
        assert!(matches!(fit_fringe(&two_phases), Err(MeasurementError::InsufficientData(_))));
        let narrow: Vec<_> = [0.0, 0.3, 0.6, 0.9, 1.2].into_iter().map(|x| sample(x, 5.0)).collect();
        assert!(matches!(fit_fringe(&narrow), Err(MeasurementError::InsufficientData(_))));
    }

    #[test]
    fn covariance_is_symmetric_psd() {
        let samples: Vec<_> = grid(16, 2.0).into_iter().map(|x| sample(x, 7.0 + 3.0 * (x - 1.0).cos())).collect();
        let fit = fit_fringe(&samples).unwrap();
        for cov in [fit.covariance, fit.linear_covariance] {
            let m = Matrix3::from_fn(|r, c| cov[r][c]);
            assert!((m - m.transpose()).abs().max() < 1e-12 * m.abs().max());
            assert!(m.symmetric_eigenvalues().min() >= -1e-12 * m.abs().max());
        }
    }
}

//! End-to-end simulation of the six χ scans and their reduction to the
//! reduced-inequality test.

use serde::{Deserialize, Serialize};

use super::{
    counts_at, evaluate_inequality, expectation_with_covariance, fit_fringe, CountRecord,
    CountSimulator, ExpectationEstimate, FringeFit, InequalityResult, MeasurementError,
    DEFAULT_FLUX_EXPOSURE, DEFAULT_SCAN_POINTS,
};
use crate::interferometer::{
    default_chi_grid, standard_scans, Context, ForwardModel, MeasurementContext, Scan,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationPlan {
    pub scans: Vec<Scan>,
    pub chi_grid: Vec<f64>,
    /// Expected counts per unit relative rate (the joint-fringe mean).
    pub flux_exposure: f64,
}

impl Default for SimulationPlan {
    fn default() -> Self {
        Self {
            scans: standard_scans(),
            chi_grid: default_chi_grid(DEFAULT_SCAN_POINTS),
            flux_exposure: DEFAULT_FLUX_EXPOSURE,
        }
    }
}

impl SimulationPlan {
    pub fn with_flux_exposure(mut self, flux_exposure: f64) -> Self {
        self.flux_exposure = flux_exposure;
        self
    }
}

/// Poisson counts for every `(scan, χ)` point. The stream index of a point
/// is its position in scan-major order, so results depend only on the seed.
pub fn simulate_experiment(
    model: &ForwardModel<f64>,
    plan: &SimulationPlan,
    seed: u64,
) -> Result<Vec<CountRecord>, MeasurementError> {
    if !(plan.flux_exposure.is_finite() && plan.flux_exposure > 0.0) {
        return Err(MeasurementError::InvalidExposure(plan.flux_exposure));
    }
    let sim = CountSimulator::new(seed);
    let mut records = Vec::with_capacity(plan.scans.len() * plan.chi_grid.len());
    let mut stream = 0u64;
    for scan in &plan.scans {
        for (chi, rate) in model.fringe_curve(scan, &plan.chi_grid)? {
            let counts = sim.draw(rate * plan.flux_exposure, stream)?;
            stream += 1;
            records.push(CountRecord {
                context: scan.context,
                alpha: scan.alpha,
                chi,
                rotator: scan.rotator,
                counts,
                exposure: 1.0,
            });
        }
    }
    Ok(records)
}

/// Splits records into scans in order of first appearance.
pub fn group_scans(records: &[CountRecord]) -> Vec<(Scan, Vec<CountRecord>)> {
    let mut groups: Vec<(Scan, Vec<CountRecord>)> = Vec::new();
    for r in records {
        let setting = r.setting();
        match groups.iter_mut().find(|(scan, _)| scan.contains(&setting)) {
            Some((_, members)) => members.push(*r),
            None => {
                let alpha = if r.context == Context::Bell { 0.0 } else { r.alpha };
                let scan = Scan { context: r.context, alpha, rotator: r.rotator };
                groups.push((scan, vec![*r]));
            }
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanFit {
    pub scan: Scan,
    pub samples: usize,
    pub fit: FringeFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub fits: Vec<ScanFit>,
    pub inequality: InequalityResult,
}

fn estimate_term(
    context: Context,
    groups: &[(Scan, Vec<CountRecord>)],
    fits: &mut [Option<FringeFit>],
) -> Result<ExpectationEstimate, MeasurementError> {
    let mc = MeasurementContext::new(context);
    let mut sources = [(0usize, 0.0f64); 4];
    for (slot, setting) in sources.iter_mut().zip(mc.settings.iter()) {
        let idx = groups
            .iter()
            .position(|(scan, _)| scan.contains(setting))
            .ok_or(MeasurementError::MissingContext(context))?;
        if fits[idx].is_none() {
            fits[idx] = Some(fit_fringe(&groups[idx].1)?);
        }
        *slot = (idx, setting.chi);
    }
    let mut values = [0.0; 4];
    let mut cov = [[0.0; 4]; 4];
    for i in 0..4 {
        let (gi, chi_i) = sources[i];
        let fit = fits[gi].as_ref().expect("fitted above");
        values[i] = counts_at(fit, chi_i).value;
        for j in 0..4 {
            let (gj, chi_j) = sources[j];
            if gi == gj {
                cov[i][j] = fit.covariance_between(chi_i, chi_j);
            }
        }
    }
    expectation_with_covariance(context, values, cov)
}

/// Fits every scan the three contexts need, reads the fitted rates at the
/// required phases and evaluates the reduced inequality. Errors on values
/// from the same fit are propagated with their full covariance.
pub fn analyze(records: &[CountRecord]) -> Result<AnalysisReport, MeasurementError> {
    let groups = group_scans(records);
    let mut fits: Vec<Option<FringeFit>> = vec![None; groups.len()];
    let xx = estimate_term(Context::Xx, &groups, &mut fits)?;
    let yy = estimate_term(Context::Yy, &groups, &mut fits)?;
    let bell = estimate_term(Context::Bell, &groups, &mut fits)?;
    let inequality = evaluate_inequality(xx, yy, bell)?;
    let fits = groups
        .iter()
        .zip(fits)
        .filter_map(|((scan, members), fit)| {
            fit.map(|fit| ScanFit { scan: *scan, samples: members.len(), fit })
        })
        .collect();
    Ok(AnalysisReport { fits, inequality })
}

//! Forward model of the spin ⊗ path interferometer.
//!
//! The prepared state passes either a joint spin/path analysis (phase
//! shifter χ selects the path projection, Larmor phase α the spin direction
//! in the x–y plane) or the Bell-state discrimination stage, where a second
//! flipper in path II maps the four common eigenstates of σx^s σy^p and
//! σy^s σx^p onto distinct spin/phase outcomes.
//!
//! Imperfect contrast is modelled per context as admixture of the maximally
//! mixed state, `ρ = v|ψ⟩⟨ψ| + (1 − v)·1/4`, so a projector `|π⟩⟨π|` fires
//! with probability `v·|⟨π|ψ⟩|² + (1 − v)/4`.

mod config;

use std::f64::consts::PI;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{bell_state, Operator, StateVector, DIM};
use crate::scalar::RealScalar;

pub use config::{parse_state_spec, ConfigError, InstrumentConfig, Visibilities};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterferometerError {
    #[error("no entangled state is prepared with RF flipper I switched off")]
    PreparationUnavailable,
    #[error("visibility {0} outside [0, 1]")]
    InvalidVisibility(f64),
    #[error("rotator setting {rotator:?} is not used by the {context:?} context")]
    InvalidRotator { context: Context, rotator: Rotator },
    #[error("χ grid is empty")]
    EmptyGrid,
}

/// DC spin-rotator state in the O-beam.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rotator {
    /// Spin-up analysis.
    Off,
    /// Maps the x–y plane onto the analyzer axis; used with the Larmor phase.
    PiHalf,
    /// Spin-down analysis.
    Pi,
}

impl Rotator {
    pub fn as_str(self) -> &'static str {
        match self {
            Rotator::Off => "off",
            Rotator::PiHalf => "pi_half",
            Rotator::Pi => "pi",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "off" => Some(Rotator::Off),
            "pi_half" => Some(Rotator::PiHalf),
            "pi" => Some(Rotator::Pi),
            _ => None,
        }
    }
}

/// The three measured correlation terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    /// σx^s · σx^p, joint spin/path analysis.
    Xx,
    /// σy^s · σy^p, joint spin/path analysis.
    Yy,
    /// σx^s σy^p · σy^s σx^p, Bell-state discrimination.
    Bell,
}

impl Context {
    pub const ALL: [Context; 3] = [Context::Xx, Context::Yy, Context::Bell];

    pub fn as_str(self) -> &'static str {
        match self {
            Context::Xx => "xx",
            Context::Yy => "yy",
            Context::Bell => "bell",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "xx" => Some(Context::Xx),
            "yy" => Some(Context::Yy),
            "bell" => Some(Context::Bell),
            _ => None,
        }
    }

    pub fn flipper_two(self) -> bool {
        self == Context::Bell
    }

    /// Reference setting `(α, χ)` of a joint context.
    pub fn joint_reference(self) -> Option<(f64, f64)> {
        match self {
            Context::Xx => Some((0.0, 0.0)),
            Context::Yy => Some((PI / 2.0, PI / 2.0)),
            Context::Bell => None,
        }
    }
}

/// One projective detection setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub context: Context,
    pub alpha: f64,
    pub chi: f64,
    pub rotator: Rotator,
    pub flipper_two: bool,
}

impl Setting {
    pub fn joint(context: Context, alpha: f64, chi: f64) -> Self {
        Self { context, alpha, chi, rotator: Rotator::PiHalf, flipper_two: false }
    }

    pub fn bell(chi: f64, rotator: Rotator) -> Self {
        Self { context: Context::Bell, alpha: 0.0, chi, rotator, flipper_two: true }
    }
}

/// The four projections a context needs, ordered so that the first two
/// carry the +1 outcome of the measured product and the last two the −1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementContext {
    pub context: Context,
    pub settings: [Setting; 4],
}

impl MeasurementContext {
    pub fn new(context: Context) -> Self {
        let settings = match context.joint_reference() {
            Some((a, c)) => [
                Setting::joint(context, a, c),
                Setting::joint(context, a + PI, c + PI),
                Setting::joint(context, a + PI, c),
                Setting::joint(context, a, c + PI),
            ],
            None => [
                Setting::bell(PI / 2.0, Rotator::Off),
                Setting::bell(-PI / 2.0, Rotator::Off),
                Setting::bell(PI / 2.0, Rotator::Pi),
                Setting::bell(-PI / 2.0, Rotator::Pi),
            ],
        };
        Self { context, settings }
    }

    pub fn is_consistent(&self) -> bool {
        self.settings
            .iter()
            .all(|s| s.context == self.context && s.flipper_two == self.context.flipper_two())
    }
}

/// A χ scan at fixed spin analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub context: Context,
    pub alpha: f64,
    pub rotator: Rotator,
}

impl Scan {
    pub fn setting(&self, chi: f64) -> Setting {
        Setting {
            context: self.context,
            alpha: self.alpha,
            chi,
            rotator: self.rotator,
            flipper_two: self.context.flipper_two(),
        }
    }

    /// Whether `setting` lies on this scan's fringe.
    pub fn contains(&self, setting: &Setting) -> bool {
        self.context == setting.context
            && self.rotator == setting.rotator
            && (self.context == Context::Bell || same_angle(self.alpha, setting.alpha))
    }
}

/// Equality modulo 2π.
pub fn same_angle(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(2.0 * PI);
    d < 1e-9 || 2.0 * PI - d < 1e-9
}

/// The six scans behind the three correlation terms: ±x and ±y spin
/// analysis for the joint contexts, spin-down and spin-up analysis for the
/// Bell discrimination.
pub fn standard_scans() -> Vec<Scan> {
    let joint = |context, alpha| Scan { context, alpha, rotator: Rotator::PiHalf };
    let bell = |rotator| Scan { context: Context::Bell, alpha: 0.0, rotator };
    vec![
        joint(Context::Xx, 0.0),
        joint(Context::Xx, PI),
        joint(Context::Yy, PI / 2.0),
        joint(Context::Yy, 3.0 * PI / 2.0),
        bell(Rotator::Pi),
        bell(Rotator::Off),
    ]
}

/// `points` equally spaced phases covering two periods, `[0, 4π)`.
pub fn default_chi_grid(points: usize) -> Vec<f64> {
    (0..points).map(|k| 4.0 * PI * k as f64 / points as f64).collect()
}

fn unit_phase<T: RealScalar>(angle: f64) -> Complex<T> {
    Complex::from_polar(T::one(), T::from_f64_lossy(angle))
}

fn real<T: RealScalar>(x: f64) -> Complex<T> {
    Complex::new(T::from_f64_lossy(x), T::zero())
}

/// (|↑⟩ + e^{iα}|↓⟩)/√2: α = 0 is +x, α = π/2 is +y.
pub fn spin_analysis_ket<T: RealScalar>(alpha: f64) -> [Complex<T>; 2] {
    let h = T::FRAC_1_SQRT_2();
    [Complex::new(h, T::zero()), unit_phase::<T>(alpha) * h]
}

/// (|I⟩ + e^{iχ}|II⟩)/√2: χ = 0 is +x on the path qubit.
pub fn path_ket<T: RealScalar>(chi: f64) -> [Complex<T>; 2] {
    let h = T::FRAC_1_SQRT_2();
    [Complex::new(h, T::zero()), unit_phase::<T>(chi) * h]
}

pub fn joint_projector<T: RealScalar>(alpha: f64, chi: f64) -> StateVector<T> {
    StateVector::product(spin_analysis_ket(alpha), path_ket(chi))
        .expect("product of unit kets is nonzero")
}

/// Spin flip conditioned on path II.
pub fn flipper_two_unitary<T: RealScalar>() -> Operator<T> {
    let o = real::<T>(0.0);
    let one = real::<T>(1.0);
    // rows/cols: |↑I⟩, |↑II⟩, |↓I⟩, |↓II⟩
    let mut entries = [[o; DIM]; DIM];
    entries[0][0] = one;
    entries[2][2] = one;
    entries[1][3] = one;
    entries[3][1] = one;
    Operator::from_entries(entries).with_label("RF_II")
}

/// Incoming state that the Bell-discrimination stage detects at phase χ.
///
/// The detector sees `|spin⟩ ⊗ |χ⟩_p` after the path-II flipper, with spin
/// down for `Rotator::Pi` and spin up for `Rotator::Off`; pulling that back
/// through the flipper gives (|↓,I⟩ + e^{iχ}|↑,II⟩)/√2 and
/// (|↑,I⟩ + e^{iχ}|↓,II⟩)/√2 respectively.
pub fn bell_projector<T: RealScalar>(
    chi: f64,
    rotator: Rotator,
) -> Result<StateVector<T>, InterferometerError> {
    let spin = match rotator {
        Rotator::Pi => [real(0.0), real(1.0)],
        Rotator::Off => [real(1.0), real(0.0)],
        Rotator::PiHalf => {
            return Err(InterferometerError::InvalidRotator { context: Context::Bell, rotator })
        }
    };
    let detected = StateVector::product(spin, path_ket(chi)).expect("unit kets");
    let flip = flipper_two_unitary::<T>();
    Ok(detected.apply_unitary(&flip.adjoint()).expect("flipper is unitary"))
}

fn check_visibility(v: f64) -> Result<(), InterferometerError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(InterferometerError::InvalidVisibility(v))
    }
}

/// Closed form for the Bell state at zero phase offset: `(1 − v·cos(α − χ))/4`.
pub fn joint_probability<T: RealScalar>(
    alpha: T,
    chi: T,
    visibility: T,
) -> Result<T, InterferometerError> {
    check_visibility(visibility.as_f64())?;
    let quarter = T::from_f64_lossy(0.25);
    Ok(quarter * (T::one() - visibility * (alpha - chi).cos()))
}

/// Closed form for the Bell state at zero phase offset.
///
/// Spin-down analysis (`Rotator::Pi`) gives `(1 + v)/4 − (v/2)·cos χ`,
/// which is `(1 + v)/4` at χ = ±π/2 (the |φ±⟩ projections). Spin-up
/// analysis gives the flat `(1 − v)/4`.
pub fn bell_discrimination_probability<T: RealScalar>(
    chi: T,
    rotator: Rotator,
    visibility: T,
) -> Result<T, InterferometerError> {
    check_visibility(visibility.as_f64())?;
    let quarter = T::from_f64_lossy(0.25);
    let half = T::from_f64_lossy(0.5);
    match rotator {
        Rotator::Pi => Ok(quarter * (T::one() + visibility) - half * visibility * chi.cos()),
        Rotator::Off => Ok(quarter * (T::one() - visibility)),
        Rotator::PiHalf => Err(InterferometerError::InvalidRotator { context: Context::Bell, rotator }),
    }
}

/// Ideal preparation: the Bell-like spin/path state when flipper I is on.
pub fn prepare_state<T: RealScalar>(
    config: &InstrumentConfig,
) -> Result<StateVector<T>, InterferometerError> {
    if config.rf_flipper_one {
        Ok(bell_state())
    } else {
        Err(InterferometerError::PreparationUnavailable)
    }
}

/// Settings-to-probability map for a prepared state.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardModel<T> {
    pub state: StateVector<T>,
    pub visibilities: Visibilities,
    /// Added to χ before projection.
    pub phase_offset: f64,
    /// Additive probability on the spin-up Bell channel.
    pub background: f64,
}

impl<T: RealScalar> ForwardModel<T> {
    pub fn ideal(state: StateVector<T>) -> Self {
        Self {
            state,
            visibilities: Visibilities::perfect(),
            phase_offset: 0.0,
            background: 0.0,
        }
    }

    /// Uses the config's state override when present, otherwise the
    /// flipper-I preparation.
    pub fn from_config(config: &InstrumentConfig) -> Result<Self, InterferometerError> {
        let state = match &config.state {
            Some(s) => StateVector::new(s.amplitudes().map(|z| {
                Complex::new(T::from_f64_lossy(z.re), T::from_f64_lossy(z.im))
            }))
            .map_err(|_| InterferometerError::PreparationUnavailable)?,
            None => prepare_state(config)?,
        };
        for v in config.visibilities.as_array() {
            check_visibility(v)?;
        }
        Ok(Self {
            state,
            visibilities: config.visibilities,
            phase_offset: config.phase_offset,
            background: config.background,
        })
    }

    pub fn projector(&self, setting: &Setting) -> Result<StateVector<T>, InterferometerError> {
        let chi = setting.chi + self.phase_offset;
        match setting.context {
            Context::Xx | Context::Yy => {
                if setting.rotator != Rotator::PiHalf {
                    return Err(InterferometerError::InvalidRotator {
                        context: setting.context,
                        rotator: setting.rotator,
                    });
                }
                Ok(joint_projector(setting.alpha, chi))
            }
            Context::Bell => bell_projector(chi, setting.rotator),
        }
    }

    /// Detection probability per incident neutron at `setting`.
    pub fn probability(&self, setting: &Setting) -> Result<T, InterferometerError> {
        let v = T::from_f64_lossy(self.visibilities.for_context(setting.context));
        let pure = self.projector(setting)?.overlap_probability(&self.state);
        let quarter = T::from_f64_lossy(0.25);
        let mut p = v * pure + (T::one() - v) * quarter;
        if setting.context == Context::Bell && setting.rotator == Rotator::Off {
            p = p + T::from_f64_lossy(self.background);
        }
        Ok(p)
    }

    /// Detection rate relative to the unpolarized fringe mean (probability × 4).
    pub fn ideal_rate(&self, setting: &Setting) -> Result<T, InterferometerError> {
        Ok(self.probability(setting)? * T::from_f64_lossy(4.0))
    }

    /// Noise-free fringe `(χ, rate)` along a scan.
    pub fn fringe_curve(
        &self,
        scan: &Scan,
        chi_grid: &[f64],
    ) -> Result<Vec<(f64, T)>, InterferometerError> {
        if chi_grid.is_empty() {
            return Err(InterferometerError::EmptyGrid);
        }
        chi_grid
            .iter()
            .map(|&chi| Ok((chi, self.ideal_rate(&scan.setting(chi))?)))
            .collect()
    }
}

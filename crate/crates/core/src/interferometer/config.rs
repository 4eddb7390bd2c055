//! Plain-text `key = value` instrument configuration.
//!
//! ```text
//! # comments start with '#'
//! flipper_I       = on
//! flipper_II      = off
//! chi             = 90deg        # radians unless suffixed with `deg`
//! alpha           = 0
//! rotator         = pi_half      # off | pi_half | pi
//! visibility_xx   = 0.679
//! visibility_yy   = 0.682
//! visibility_bell = 0.93
//! phase_offset    = 0
//! background      = 0
//! state           = bell         # or four complex amplitudes, e.g. 1,0,0,0
//! ```
//!
//! Every key is optional; missing keys keep their defaults.

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Context, Rotator};
use crate::algebra::{bell_state, AlgebraError, StateVector, DIM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {reason}")]
    InvalidValue { line: usize, key: String, reason: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
}

/// Contrast per context, each in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Visibilities {
    pub xx: f64,
    pub yy: f64,
    pub bell: f64,
}

impl Default for Visibilities {
    /// Reproduces the measured moduli 0.679, 0.682 and 0.93.
    fn default() -> Self {
        Self { xx: 0.679, yy: 0.682, bell: 0.93 }
    }
}

impl Visibilities {
    pub fn perfect() -> Self {
        Self { xx: 1.0, yy: 1.0, bell: 1.0 }
    }

    pub fn uniform(v: f64) -> Self {
        Self { xx: v, yy: v, bell: v }
    }

    pub fn for_context(&self, c: Context) -> f64 {
        match c {
            Context::Xx => self.xx,
            Context::Yy => self.yy,
            Context::Bell => self.bell,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.xx, self.yy, self.bell]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentConfig {
    pub rf_flipper_one: bool,
    pub rf_flipper_two: bool,
    /// Phase shifter setting, radians.
    pub chi: f64,
    /// Larmor phase, radians.
    pub alpha: f64,
    pub dc_rotator: Rotator,
    pub visibilities: Visibilities,
    /// Calibration offset added to χ, radians.
    pub phase_offset: f64,
    /// Residual probability on the spin-up Bell channel.
    pub background: f64,
    /// Replaces the flipper-I preparation when set.
    pub state: Option<StateVector<f64>>,
}

impl Default for InstrumentConfig {
    fn default() -> Self {
        Self {
            rf_flipper_one: true,
            rf_flipper_two: false,
            chi: 0.0,
            alpha: 0.0,
            dc_rotator: Rotator::PiHalf,
            visibilities: Visibilities::default(),
            phase_offset: 0.0,
            background: 0.0,
            state: None,
        }
    }
}

fn parse_switch(v: &str) -> Result<bool, String> {
    match v {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on/off, got `{v}`")),
    }
}

fn parse_real(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("not a number: `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: `{v}`"))
    }
}

/// Radians by default; `deg` and `rad` suffixes are accepted.
fn parse_angle(v: &str) -> Result<f64, String> {
    if let Some(d) = v.strip_suffix("deg") {
        Ok(parse_real(d.trim())?.to_radians())
    } else if let Some(r) = v.strip_suffix("rad") {
        parse_real(r.trim())
    } else {
        parse_real(v)
    }
}

fn parse_unit_interval(v: &str) -> Result<f64, String> {
    let x = parse_real(v)?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} outside [0, 1]"))
    }
}

/// `bell` or four comma-separated complex amplitudes such as `0.6, 0.8i, 0, 0`.
///
/// Amplitudes must already be normalized.
pub fn parse_state_spec(spec: &str) -> Result<StateVector<f64>, String> {
    let spec = spec.trim();
    if spec.eq_ignore_ascii_case("bell") {
        return Ok(bell_state());
    }
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != DIM {
        return Err(format!("expected `bell` or {DIM} amplitudes, got {}", parts.len()));
    }
    let mut amps = [Complex::new(0.0, 0.0); DIM];
    for (slot, p) in amps.iter_mut().zip(&parts) {
        let z: Complex<f64> = Complex::from_str(&p.replace(' ', ""))
            .map_err(|_| format!("bad complex amplitude `{p}`"))?;
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(format!("non-finite amplitude `{p}`"));
        }
        *slot = z;
    }
    StateVector::new(amps).map_err(|e: AlgebraError| e.to_string())
}

fn format_state(s: &StateVector<f64>) -> String {
    let parts: Vec<String> = s
        .amplitudes()
        .iter()
        .map(|z| format!("{}{:+}i", z.re, z.im))
        .collect();
    parts.join(",")
}

impl FromStr for InstrumentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = InstrumentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::DuplicateKey { line, key: key.to_owned() });
            }
            seen.push(key.to_owned());
            let invalid = |reason: String| ConfigError::InvalidValue {
                line,
                key: key.to_owned(),
                reason,
            };
            match key {
                "flipper_I" => cfg.rf_flipper_one = parse_switch(value).map_err(invalid)?,
                "flipper_II" => cfg.rf_flipper_two = parse_switch(value).map_err(invalid)?,
                "chi" => cfg.chi = parse_angle(value).map_err(invalid)?,
                "alpha" => cfg.alpha = parse_angle(value).map_err(invalid)?,
                "phase_offset" => cfg.phase_offset = parse_angle(value).map_err(invalid)?,
                "rotator" => {
                    cfg.dc_rotator = Rotator::parse(value)
                        .ok_or_else(|| invalid(format!("expected off/pi_half/pi, got `{value}`")))?
                }
                "visibility_xx" => cfg.visibilities.xx = parse_unit_interval(value).map_err(invalid)?,
                "visibility_yy" => cfg.visibilities.yy = parse_unit_interval(value).map_err(invalid)?,
                "visibility_bell" => {
                    cfg.visibilities.bell = parse_unit_interval(value).map_err(invalid)?
                }
                "background" => {
                    let b = parse_real(value).map_err(&invalid)?;
                    if !(0.0..1.0).contains(&b) {
                        return Err(invalid(format!("{b} outside [0, 1)")));
                    }
                    cfg.background = b;
                }
                "state" => cfg.state = Some(parse_state_spec(value).map_err(invalid)?),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_owned() }),
            }
        }
        Ok(cfg)
    }
}

impl InstrumentConfig {
    /// Renders every key; angles in radians.
    pub fn to_config_string(&self) -> String {
        let switch = |b: bool| if b { "on" } else { "off" };
        let mut out = String::new();
        let _ = writeln!(out, "flipper_I = {}", switch(self.rf_flipper_one));
        let _ = writeln!(out, "flipper_II = {}", switch(self.rf_flipper_two));
        let _ = writeln!(out, "chi = {}", self.chi);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "rotator = {}", self.dc_rotator.as_str());
        let _ = writeln!(out, "visibility_xx = {}", self.visibilities.xx);
        let _ = writeln!(out, "visibility_yy = {}", self.visibilities.yy);
        let _ = writeln!(out, "visibility_bell = {}", self.visibilities.bell);
        let _ = writeln!(out, "phase_offset = {}", self.phase_offset);
        let _ = writeln!(out, "background = {}", self.background);
        if let Some(s) = &self.state {
            let _ = writeln!(out, "state = {}", format_state(s));
        }
        out
    }
}

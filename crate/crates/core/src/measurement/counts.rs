use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::MeasurementError;
use crate::interferometer::{Context, Rotator, Setting};

pub const COUNTS_HEADER: [&str; 6] = ["context", "alpha_rad", "chi_rad", "rotator", "counts", "exposure"];

/// Neutron counts at one instrument setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountRecord {
    pub context: Context,
    #[serde(rename = "alpha_rad")]
    pub alpha: f64,
    #[serde(rename = "chi_rad")]
    pub chi: f64,
    pub rotator: Rotator,
    pub counts: u64,
    pub exposure: f64,
}

impl CountRecord {
    pub fn setting(&self) -> Setting {
        Setting {
            context: self.context,
            alpha: self.alpha,
            chi: self.chi,
            rotator: self.rotator,
            flipper_two: self.context.flipper_two(),
        }
    }

    pub fn rate(&self) -> f64 {
        self.counts as f64 / self.exposure
    }
}

/// Seeded Poisson source. Each draw is addressed by a stream index, so the
/// result depends only on `(seed, stream, mean)` and not on call order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountSimulator {
    pub seed: u64,
}

impl CountSimulator {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn draw(&self, mean: f64, stream: u64) -> Result<u64, MeasurementError> {
        if !mean.is_finite() || mean < 0.0 {
            return Err(MeasurementError::InvalidRate(mean));
        }
        if mean == 0.0 {
            return Ok(0);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        let poisson = Poisson::new(mean).map_err(|_| MeasurementError::InvalidRate(mean))?;
        Ok(poisson.sample(&mut rng) as u64)
    }
}

/// Poisson counts with mean `ideal_rate · flux · exposure`.
pub fn simulate_counts(
    ideal_rate: f64,
    flux: f64,
    exposure: f64,
    seed: u64,
    stream: u64,
) -> Result<u64, MeasurementError> {
    if !ideal_rate.is_finite() || ideal_rate < 0.0 {
        return Err(MeasurementError::InvalidRate(ideal_rate));
    }
    for x in [flux, exposure] {
        if !x.is_finite() || x <= 0.0 {
            return Err(MeasurementError::InvalidExposure(x));
        }
    }
    CountSimulator::new(seed).draw(ideal_rate * flux * exposure, stream)
}

/// Writes the interchange CSV, preceded by a `# comment` line when given.
pub fn write_counts_csv<W: Write>(
    mut out: W,
    records: &[CountRecord],
    comment: Option<&str>,
) -> Result<(), MeasurementError> {
    if let Some(c) = comment {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| MeasurementError::Schema(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record(COUNTS_HEADER)
            .map_err(|e| MeasurementError::Schema(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the interchange CSV; `#` lines are skipped.
pub fn read_counts_csv<R: Read>(input: R) -> Result<Vec<CountRecord>, MeasurementError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| MeasurementError::Schema(e.to_string()))?
        .clone();
    if headers.iter().ne(COUNTS_HEADER.iter().copied()) {
        return Err(MeasurementError::Schema(format!(
            "expected header `{}`, found `{}`",
            COUNTS_HEADER.join(","),
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut records = Vec::new();
    for (k, row) in rdr.deserialize::<CountRecord>().enumerate() {
        let r = row.map_err(|e| MeasurementError::Schema(format!("row {}: {e}", k + 1)))?;
        if !(r.exposure.is_finite() && r.exposure > 0.0) {
            return Err(MeasurementError::Schema(format!("row {}: exposure must be > 0", k + 1)));
        }
        if !(r.alpha.is_finite() && r.chi.is_finite()) {
            return Err(MeasurementError::Schema(format!("row {}: non-finite angle", k + 1)));
        }
        records.push(r);
    }
    Ok(records)
}

//! `neutron-ks` command-line front end.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 configuration error,
//! 4 count-data schema or analysis error, 5 verification mismatch,
//! 6 I/O failure.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{bell_state, StateVector};
use crate::interferometer::{parse_state_spec, ConfigError, ForwardModel, InstrumentConfig, InterferometerError};
use crate::measurement::{
    self, analyze, fit_fringe, group_scans, read_counts_csv, simulate_experiment, write_counts_csv,
    CountRecord, MeasurementError, ScanFit, SimulationPlan, DEFAULT_FLUX_EXPOSURE,
};
use crate::peres_mermin::{
    assignment_contradiction, build_magic_square, classical_bound, qm_lhs, term_expectation,
    verify_square, InequalityId, MagicSquare, NchvAssignment, Observable,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_SCHEMA: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;
pub const EXIT_IO: i32 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config {path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Instrument(#[from] InterferometerError),
    #[error("{0}")]
    Data(MeasurementError),
    #[error("verification mismatch: {0}")]
    Mismatch(String),
    #[error("{0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Config { .. } | CliError::Instrument(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_SCHEMA,
            CliError::Mismatch(_) => EXIT_MISMATCH,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<MeasurementError> for CliError {
    fn from(e: MeasurementError) -> Self {
        match e {
            MeasurementError::Io(io) => CliError::Io(io),
            MeasurementError::Interferometer(i) => CliError::Instrument(i),
            MeasurementError::InvalidRate(_) | MeasurementError::InvalidExposure(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Data(other),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "neutron-ks", version, about = "Spin-path contextuality: algebra, bounds, simulation and analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Instrument configuration file (key = value).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed; mandatory for `simulate`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Expected counts at the unpolarized fringe mean per setting.
    #[arg(long, global = true)]
    pub flux_exposure: Option<f64>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the magic-square operator identities and the assignment contradiction.
    VerifySquare,
    /// Classical maxima of both inequalities by enumeration, with quantum values.
    Bounds,
    /// Exact expectations for `bell` or four comma-separated complex amplitudes.
    Ideal {
        #[arg(allow_hyphen_values = true)]
        state: String,
    },
    /// Simulate all χ scans; writes the count CSV.
    Simulate {
        /// Also write fitted fringe points here.
        #[arg(long)]
        fringe_out: Option<PathBuf>,
        /// χ points per scan over two periods.
        #[arg(long, default_value_t = measurement::DEFAULT_SCAN_POINTS)]
        points: usize,
    },
    /// Fit fringes in a count CSV and test the reduced inequality.
    Analyze { counts: PathBuf },
    /// Fit every scan in a count CSV.
    FitFringe { counts: PathBuf },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::VerifySquare => "verify-square",
            Command::Bounds => "bounds",
            Command::Ideal { .. } => "ideal",
            Command::Simulate { .. } => "simulate",
            Command::Analyze { .. } => "analyze",
            Command::FitFringe { .. } => "fit-fringe",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub output_format: Format,
    pub output_path: Option<String>,
}

impl RunManifest {
    fn comment(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_owned(), |s| s.to_string());
        let mut c = format!("neutron-ks {} seed={seed}", self.subcommand);
        if let Some(p) = &self.config_path {
            c.push_str(&format!(" config={p}"));
        }
        c
    }
}

#[derive(Serialize)]
struct Output<'a, R: Serialize> {
    manifest: &'a RunManifest,
    #[serde(flatten)]
    report: &'a R,
}

/// Writes a JSON document or a CSV table with a leading `#` manifest line.
struct Emitter<'a> {
    manifest: RunManifest,
    sink: Box<dyn Write + 'a>,
}

impl<'a> Emitter<'a> {
    fn json<R: Serialize>(&mut self, report: &R) -> Result<(), CliError> {
        let doc = Output { manifest: &self.manifest, report };
        serde_json::to_writer_pretty(&mut self.sink, &doc).map_err(io::Error::from)?;
        writeln!(self.sink)?;
        Ok(())
    }

    fn csv(&mut self, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        writeln!(self.sink, "# {}", self.manifest.comment())?;
        let mut w = csv::Writer::from_writer(&mut self.sink);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.sink.flush()?;
        Ok(())
    }
}

fn open_sink<'a>(out: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn load_config(path: Option<&Path>) -> Result<InstrumentConfig, CliError> {
    let Some(p) = path else {
        return Ok(InstrumentConfig::default());
    };
    let text = std::fs::read_to_string(p)?;
    text.parse().map_err(|source| CliError::Config { path: p.display().to_string(), source })
}

fn read_counts(path: &Path) -> Result<(Vec<CountRecord>, Option<u64>), CliError> {
    let text = std::fs::read_to_string(path)?;
    let seed = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(str::split_whitespace)
        .find_map(|tok| tok.strip_prefix("seed=")?.parse().ok());
    let records = read_counts_csv(BufReader::new(text.as_bytes()))?;
    Ok((records, seed))
}

fn fmt_sign(v: i8) -> &'static str {
    if v > 0 {
        "+1"
    } else {
        "-1"
    }
}

fn fmt_assignment(a: &NchvAssignment) -> String {
    Observable::ALL
        .iter()
        .filter(|o| a.values.contains_key(o))
        .map(|o| format!("{}={}", o.label(), fmt_sign(a.value(*o))))
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareReport {
    pub row_signs: [i32; 3],
    pub col_signs: [i32; 3],
    pub compatible: bool,
    pub exact_route_agrees: bool,
    pub max_product_deviation: f64,
    pub max_commutator: f64,
    pub satisfiable: bool,
    pub assignments_checked: u64,
    pub reproduced: bool,
}

/// Square checks for an arbitrary (possibly corrupted) square; the exact
/// integer route always uses the canonical square.
pub fn square_report(square: &MagicSquare<f64>) -> Result<SquareReport, CliError> {
    let v = verify_square(square).map_err(|e| CliError::Mismatch(e.to_string()))?;
    let exact = verify_square(&build_magic_square::<i64>()).map_err(|e| CliError::Mismatch(e.to_string()))?;
    let c = assignment_contradiction();
    let exact_route_agrees = exact.row_signs == v.row_signs && exact.col_signs == v.col_signs;
    let reproduced = v.row_signs == [1, 1, 1]
        && v.col_signs == [1, 1, -1]
        && v.compatible
        && exact_route_agrees
        && !c.satisfiable
        && c.assignments_checked == 512;
    Ok(SquareReport {
        row_signs: v.row_signs,
        col_signs: v.col_signs,
        compatible: v.compatible,
        exact_route_agrees,
        max_product_deviation: v.max_product_deviation,
        max_commutator: v.max_commutator,
        satisfiable: c.satisfiable,
        assignments_checked: c.assignments_checked,
        reproduced,
    })
}

fn emit_square(report: &SquareReport, em: &mut Emitter<'_>, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => em.json(report),
        Format::Csv => {
            let mut rows = Vec::new();
            for (k, s) in report.row_signs.iter().enumerate() {
                rows.push(vec![format!("row_sign_{}", k + 1), s.to_string()]);
            }
            for (k, s) in report.col_signs.iter().enumerate() {
                rows.push(vec![format!("col_sign_{}", k + 1), s.to_string()]);
            }
            rows.push(vec!["compatible".into(), report.compatible.to_string()]);
            rows.push(vec!["exact_route_agrees".into(), report.exact_route_agrees.to_string()]);
            rows.push(vec!["max_product_deviation".into(), report.max_product_deviation.to_string()]);
            rows.push(vec!["max_commutator".into(), report.max_commutator.to_string()]);
            rows.push(vec!["satisfiable".into(), report.satisfiable.to_string()]);
            rows.push(vec!["assignments_checked".into(), report.assignments_checked.to_string()]);
            rows.push(vec!["reproduced".into(), report.reproduced.to_string()]);
            em.csv(&["quantity", "value"], &rows)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSummary {
    pub classical_max: i32,
    pub qm: f64,
    pub assignments_checked: u64,
    pub maximizer_count: usize,
    pub maximizer: NchvAssignment,
    /// The maximizer replayed through the inequality evaluator as ±1
    /// expectations (reduced form only).
    pub replay_lhs: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub full_5term: BoundSummary,
    pub reduced_3term: BoundSummary,
}

fn replay_reduced(a: &NchvAssignment) -> Result<f64, CliError> {
    use crate::interferometer::Context;
    use crate::measurement::{evaluate_inequality, ExpectationEstimate};
    let est = |term, v: i8| ExpectationEstimate { value: f64::from(v), std_error: 0.0, term_label: term };
    let xx = a.value(Observable::SpinX) * a.value(Observable::PathX);
    let yy = a.value(Observable::SpinY) * a.value(Observable::PathY);
    let bell = a.value(Observable::SpinXPathY) * a.value(Observable::SpinYPathX);
    Ok(evaluate_inequality(est(Context::Xx, xx), est(Context::Yy, yy), est(Context::Bell, bell))?.lhs)
}

pub fn bounds_report() -> Result<BoundsReport, CliError> {
    let summary = |id: InequalityId| -> Result<BoundSummary, CliError> {
        let r = classical_bound(id).map_err(|e| CliError::Mismatch(e.to_string()))?;
        let maximizer = r.maximizing_assignments[0].clone();
        let replay_lhs = match id {
            InequalityId::Reduced3Term => Some(replay_reduced(&maximizer)?),
            InequalityId::Full5Term => None,
        };
        Ok(BoundSummary {
            classical_max: r.classical_max,
            qm: r.qm_value,
            assignments_checked: r.assignments_checked,
            maximizer_count: r.maximizing_assignments.len(),
            maximizer,
            replay_lhs,
        })
    };
    Ok(BoundsReport {
        full_5term: summary(InequalityId::Full5Term)?,
        reduced_3term: summary(InequalityId::Reduced3Term)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermValue {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdealReport {
    pub amplitudes: Vec<[f64; 2]>,
    pub expectations: Vec<TermValue>,
    pub full_5term_lhs: f64,
    pub reduced_3term_lhs: f64,
}

pub fn ideal_report(state: &StateVector<f64>) -> Result<IdealReport, CliError> {
    let to_usage = |e: crate::algebra::AlgebraError| CliError::Usage(e.to_string());
    let expectations = InequalityId::Full5Term
        .terms()
        .iter()
        .map(|t| {
            Ok(TermValue { label: t.product_label(), value: term_expectation(t, state).map_err(to_usage)? })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(IdealReport {
        amplitudes: state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
        expectations,
        full_5term_lhs: qm_lhs(InequalityId::Full5Term, state).map_err(to_usage)?,
        reduced_3term_lhs: qm_lhs(InequalityId::Reduced3Term, state).map_err(to_usage)?,
    })
}

fn fit_all(records: &[CountRecord]) -> Result<Vec<ScanFit>, CliError> {
    group_scans(records)
        .into_iter()
        .map(|(scan, members)| {
            Ok(ScanFit { scan, samples: members.len(), fit: fit_fringe(&members)? })
        })
        .collect()
}

fn write_fringe_csv(path: &Path, manifest: &RunManifest, records: &[CountRecord]) -> Result<(), CliError> {
    let fits = fit_all(records)?;
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# {}", manifest.comment())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["context", "alpha_rad", "rotator", "chi_rad", "counts", "fitted_value"])?;
    for r in records {
        let setting = r.setting();
        let sf = fits
            .iter()
            .find(|sf| sf.scan.contains(&setting))
            .expect("every record belongs to a fitted scan");
        w.write_record([
            r.context.as_str().to_owned(),
            r.alpha.to_string(),
            r.rotator.as_str().to_owned(),
            r.chi.to_string(),
            r.counts.to_string(),
            (sf.fit.value_at(r.chi) * r.exposure).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs one parsed invocation, writing reports to `stdout` unless `--out`
/// is given.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    run_with_square(cli, stdout, &build_magic_square())
}

/// As [`run`], with the square used by `verify-square` supplied by the caller.
pub fn run_with_square(
    cli: &Cli,
    stdout: &mut dyn Write,
    square: &MagicSquare<f64>,
) -> Result<(), CliError> {
    let mut manifest = RunManifest {
        subcommand: cli.command.name().to_owned(),
        config_path: cli.config.as_ref().map(|p| p.display().to_string()),
        seed: cli.seed,
        output_format: cli.format,
        output_path: cli.out.as_ref().map(|p| p.display().to_string()),
    };
    match &cli.command {
        Command::VerifySquare => {
            let report = square_report(square)?;
            let mut em = Emitter { manifest, sink: open_sink(cli.out.as_deref(), stdout)? };
            emit_square(&report, &mut em, cli.format)?;
            em.finish()?;
            if !report.reproduced {
                return Err(CliError::Mismatch(format!(
                    "rows {:?}, columns {:?}, compatible {}, satisfiable {}",
                    report.row_signs, report.col_signs, report.compatible, report.satisfiable
                )));
            }
            Ok(())
        }
        Command::Bounds => {
            let report = bounds_report()?;
            let mut em = Emitter { manifest, sink: open_sink(cli.out.as_deref(), stdout)? };
            match cli.format {
                Format::Json => em.json(&report)?,
                Format::Csv => {
                    let row = |id: &str, s: &BoundSummary| {
                        vec![
                            id.to_owned(),
                            s.classical_max.to_string(),
                            s.qm.to_string(),
                            s.assignments_checked.to_string(),
                            s.maximizer_count.to_string(),
                            fmt_assignment(&s.maximizer),
                        ]
                    };
                    em.csv(
                        &["inequality_id", "classical_max", "qm_value", "assignments_checked", "maximizer_count", "maximizer"],
                        &[row("full_5term", &report.full_5term), row("reduced_3term", &report.reduced_3term)],
                    )?;
                }
            }
            em.finish()
        }
        Command::Ideal { state } => {
            let psi = if state.trim().eq_ignore_ascii_case("bell") {
                bell_state()
            } else {
                parse_state_spec(state).map_err(CliError::Usage)?
            };
            let report = ideal_report(&psi)?;
            let mut em = Emitter { manifest, sink: open_sink(cli.out.as_deref(), stdout)? };
            match cli.format {
                Format::Json => em.json(&report)?,
                Format::Csv => {
                    let mut rows: Vec<Vec<String>> = report
                        .expectations
                        .iter()
                        .map(|t| vec![t.label.clone(), t.value.to_string()])
                        .collect();
                    rows.push(vec!["full_5term_lhs".into(), report.full_5term_lhs.to_string()]);
                    rows.push(vec!["reduced_3term_lhs".into(), report.reduced_3term_lhs.to_string()]);
                    em.csv(&["quantity", "value"], &rows)?;
                }
            }
            em.finish()
        }
        Command::Simulate { fringe_out, points } => {
            let seed = cli
                .seed
                .ok_or_else(|| CliError::Usage("`simulate` requires --seed".to_owned()))?;
            if *points < 4 {
                return Err(CliError::Usage("--points must be at least 4".to_owned()));
            }
            let config = load_config(cli.config.as_deref())?;
            let model = ForwardModel::<f64>::from_config(&config)?;
            let plan = SimulationPlan {
                chi_grid: crate::interferometer::default_chi_grid(*points),
                ..SimulationPlan::default()
            }
            .with_flux_exposure(cli.flux_exposure.unwrap_or(DEFAULT_FLUX_EXPOSURE));
            let records = simulate_experiment(&model, &plan, seed)?;
            let comment = format!("{} flux_exposure={}", manifest.comment(), plan.flux_exposure);
            let mut sink = open_sink(cli.out.as_deref(), stdout)?;
            write_counts_csv(&mut sink, &records, Some(&comment))?;
            sink.flush()?;
            drop(sink);
            if let Some(path) = fringe_out {
                write_fringe_csv(path, &manifest, &records)?;
            }
            Ok(())
        }
        Command::Analyze { counts } => {
            let (records, file_seed) = read_counts(counts)?;
            manifest.seed = manifest.seed.or(file_seed);
            let report = analyze(&records)?;
            let mut em = Emitter { manifest, sink: open_sink(cli.out.as_deref(), stdout)? };
            match cli.format {
                Format::Json => em.json(&report)?,
                Format::Csv => {
                    let r = &report.inequality;
                    let mut rows: Vec<Vec<String>> = r
                        .terms
                        .iter()
                        .map(|t| vec![t.term_label.as_str().to_owned(), t.value.to_string(), t.std_error.to_string()])
                        .collect();
                    rows.push(vec!["lhs".into(), r.lhs.to_string(), r.lhs_error.to_string()]);
                    rows.push(vec!["bound".into(), r.bound.to_string(), String::new()]);
                    rows.push(vec!["violated".into(), r.violated.to_string(), String::new()]);
                    rows.push(vec!["sigma_distance".into(), r.sigma_distance.to_string(), String::new()]);
                    em.csv(&["quantity", "value", "std_error"], &rows)?;
                }
            }
            em.finish()
        }
        Command::FitFringe { counts } => {
            let (records, file_seed) = read_counts(counts)?;
            manifest.seed = manifest.seed.or(file_seed);
            let fits = fit_all(&records)?;
            let mut em = Emitter { manifest, sink: open_sink(cli.out.as_deref(), stdout)? };
            match cli.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Fits<'a> {
                        fits: &'a [ScanFit],
                    }
                    em.json(&Fits { fits: &fits })?
                }
                Format::Csv => {
                    let rows: Vec<Vec<String>> = fits
                        .iter()
                        .map(|sf| {
                            let f = &sf.fit;
                            vec![
                                sf.scan.context.as_str().to_owned(),
                                sf.scan.alpha.to_string(),
                                sf.scan.rotator.as_str().to_owned(),
                                sf.samples.to_string(),
                                f.offset_a.to_string(),
                                f.amplitude_b.to_string(),
                                f.phase_phi.to_string(),
                                f.covariance[0][0].sqrt().to_string(),
                                f.covariance[1][1].sqrt().to_string(),
                                f.covariance[2][2].sqrt().to_string(),
                                f.chi_squared.to_string(),
                                f.dof.to_string(),
                            ]
                        })
                        .collect();
                    em.csv(
                        &[
                            "context", "alpha_rad", "rotator", "samples", "offset_A", "amplitude_B", "phase_phi",
                            "sigma_A", "sigma_B", "sigma_phi", "chi_squared", "dof",
                        ],
                        &rows,
                    )?;
                }
            }
            em.finish()
        }
    }
}

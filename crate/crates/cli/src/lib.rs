//! Front-end plumbing for the `hysmc` binary: model and property loading,
//! run reports, the reference-table runner and calibration.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use hysmc::bltl::{parse_bltl, scale_bounds, BltlError, Formula};
use hysmc::model::{parse_model, HybridAutomaton, ModelError};
use hysmc::models::{builtin_model, property_suite, BuiltinError, PropertyRow, Study};
use hysmc::sampler::{SamplerConfig, Trajectory};
use hysmc::smc::{calibration_report, run_smc, sample_size, CalibrationReport, Decision, SmcConfig, SmcError, Verdict};

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Io { path: String, source: io::Error },
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("model: {0}")]
    Builtin(#[from] BuiltinError),
    #[error("property: {0}")]
    Property(#[from] BltlError),
    #[error(transparent)]
    Smc(#[from] SmcError),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundUnit {
    /// Bounds count trajectory positions.
    Steps,
    /// Bounds are model time, divided by the model's step size.
    Time,
}

/// A loaded automaton and the string that identifies it.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub id: String,
    pub automaton: HybridAutomaton,
}

/// Loads `builtin:...` queries or model files.
pub fn load_model(spec: &str) -> Result<LoadedModel, CliError> {
    let automaton = if spec.starts_with("builtin:") {
        builtin_model(spec)?
    } else {
        parse_model(&read(spec)?)?
    };
    Ok(LoadedModel {
        id: spec.to_string(),
        automaton,
    })
}

fn read(path: &str) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

/// Reads a property from a file if `spec` names one, otherwise treats it as
/// formula text. Returns the text and the formula with bounds in steps.
pub fn load_property(spec: &str, h: &HybridAutomaton, unit: BoundUnit) -> Result<(String, Formula), CliError> {
    let text = if Path::new(spec).is_file() {
        read(spec)?
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ")
            .trim()
            .to_string()
    } else {
        spec.trim().to_string()
    };
    let f = parse_bltl(&text, &h.labels())?;
    let f = match unit {
        BoundUnit::Steps => f,
        BoundUnit::Time => scale_bounds(&f, 1.0 / h.delta)?,
    };
    Ok((text, f))
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub model: String,
    pub property: String,
    pub delta: f64,
    pub alpha: f64,
    /// Trajectory length in steps; the model horizon when absent.
    pub steps: Option<usize>,
    pub points: usize,
    pub substeps: usize,
    pub seed: u64,
    pub threads: usize,
    pub bound_unit: BoundUnit,
}

impl VerifyOptions {
    pub fn new(model: impl Into<String>, property: impl Into<String>) -> Self {
        VerifyOptions {
            model: model.into(),
            property: property.into(),
            delta: 0.01,
            alpha: 0.01,
            steps: None,
            points: 10,
            substeps: 100,
            seed: 0,
            threads: 1,
            bound_unit: BoundUnit::Time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRun {
    pub mode: String,
    pub from: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleSummary {
    pub seed: u64,
    pub index: u64,
    pub positions: usize,
    /// Mode sequence, run-length encoded.
    pub modes: Vec<ModeRun>,
}

impl CounterexampleSummary {
    pub fn new(t: &Trajectory, h: &HybridAutomaton) -> Self {
        let mut modes: Vec<ModeRun> = Vec::new();
        for (j, &m) in t.modes.iter().enumerate() {
            match modes.last_mut() {
                Some(r) if r.mode == h.modes[m].name => r.length += 1,
                _ => modes.push(ModeRun {
                    mode: h.modes[m].name.clone(),
                    from: j,
                    length: 1,
                }),
            }
        }
        CounterexampleSummary {
            seed: t.seed,
            index: t.index,
            positions: t.len(),
            modes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub wall_seconds: f64,
    pub sample_mean_seconds: f64,
    pub sample_min_seconds: f64,
    pub sample_max_seconds: f64,
}

impl Timing {
    fn from_verdict(v: &Verdict) -> Self {
        let secs: Vec<f64> = v.log.iter().map(|r| r.seconds).collect();
        let n = secs.len().max(1) as f64;
        Timing {
            wall_seconds: v.seconds,
            sample_mean_seconds: secs.iter().sum::<f64>() / n,
            sample_min_seconds: if secs.is_empty() {
                0.0
            } else {
                secs.iter().copied().fold(f64::INFINITY, f64::min)
            },
            sample_max_seconds: secs.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// Everything needed to repeat a run, plus its outcome. Only `timing`
/// varies between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub model: String,
    pub model_name: String,
    pub property: String,
    pub bound_unit: BoundUnit,
    /// The formula as checked, bounds in steps.
    pub formula: String,
    pub delta: f64,
    pub alpha: f64,
    pub required_samples: usize,
    pub points: usize,
    pub steps: usize,
    pub step_size: f64,
    pub substeps: usize,
    pub seed: u64,
    pub decision: &'static str,
    pub holds: Option<bool>,
    pub samples: usize,
    pub error: Option<String>,
    pub counterexample: Option<CounterexampleSummary>,
    pub timing: Timing,
}

pub fn decision_name(d: Decision) -> &'static str {
    match d {
        Decision::H0 => "H0",
        Decision::H1 => "H1",
        Decision::Inconclusive => "inconclusive",
    }
}

pub fn exit_code(d: Decision) -> i32 {
    match d {
        Decision::H0 => 0,
        Decision::H1 => 1,
        Decision::Inconclusive => 2,
    }
}

/// Runs one verification. The counterexample, if any, is returned alongside
/// the report.
pub fn verify(opts: &VerifyOptions) -> Result<(RunReport, Option<Trajectory>, HybridAutomaton), CliError> {
    let model = load_model(&opts.model)?;
    let h = model.automaton;
    let (text, formula) = load_property(&opts.property, &h, opts.bound_unit)?;
    let steps = opts.steps.unwrap_or(h.horizon);
    if opts.points == 0 {
        return Err(CliError::Usage("--J must be at least 1".into()));
    }
    if opts.substeps == 0 {
        return Err(CliError::Usage("--substeps must be at least 1".into()));
    }
    let mut scfg = SamplerConfig::new(steps, opts.seed);
    scfg.points = opts.points;
    scfg.flow.substeps = opts.substeps;
    let mut cfg = SmcConfig::new(opts.delta, opts.alpha, opts.seed);
    cfg.threads = opts.threads;
    let v = run_smc(&h, &formula, &cfg, scfg)?;
    let report = RunReport {
        schema: SCHEMA,
        model: model.id,
        model_name: h.name.clone(),
        property: text,
        bound_unit: opts.bound_unit,
        formula: formula.to_string(),
        delta: opts.delta,
        alpha: opts.alpha,
        required_samples: v.required,
        points: opts.points,
        steps,
        step_size: h.delta,
        substeps: opts.substeps,
        seed: opts.seed,
        decision: decision_name(v.decision),
        holds: match v.decision {
            Decision::H0 => Some(true),
            Decision::H1 => Some(false),
            Decision::Inconclusive => None,
        },
        samples: v.samples,
        error: v.error.as_ref().map(|e| e.to_string()),
        counterexample: v.counterexample.as_ref().map(|t| CounterexampleSummary::new(t, &h)),
        timing: Timing::from_verdict(&v),
    };
    Ok((report, v.counterexample, h))
}

/// Human-readable report.
pub fn render_report(r: &RunReport) -> String {
    let mut s = String::new();
    let rows: Vec<(&str, String)> = vec![
        ("model", r.model.clone()),
        ("property", r.property.clone()),
        ("delta / alpha", format!("{} / {}", r.delta, r.alpha)),
        ("N (required)", r.required_samples.to_string()),
        ("J / K", format!("{} / {}", r.points, r.steps)),
        ("step size", r.step_size.to_string()),
        ("substeps", r.substeps.to_string()),
        ("seed", r.seed.to_string()),
        (
            "verdict",
            match r.holds {
                Some(true) => "H0 (property holds)".into(),
                Some(false) => "H1 (property violated)".into(),
                None => "inconclusive".into(),
            },
        ),
        ("samples", r.samples.to_string()),
        ("wall clock", format!("{:.3} s", r.timing.wall_seconds)),
        (
            "per sample",
            format!(
                "mean {:.4} s, max {:.4} s",
                r.timing.sample_mean_seconds, r.timing.sample_max_seconds
            ),
        ),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{k:<16} {v}");
    }
    if let Some(e) = &r.error {
        let _ = writeln!(s, "{:<16} {e}", "error");
    }
    if let Some(c) = &r.counterexample {
        let path: Vec<String> = c.modes.iter().map(|m| format!("{}x{}", m.mode, m.length)).collect();
        let _ = writeln!(
            s,
            "{:<16} trajectory {} of seed {}, {} positions: {}",
            "counterexample",
            c.index,
            c.seed,
            c.positions,
            path.join(" ")
        );
    }
    s
}

/// Writes a trajectory as CSV: position, time, mode, then one column per
/// variable.
pub fn write_trajectory_csv(t: &Trajectory, h: &HybridAutomaton, path: &Path) -> io::Result<()> {
    let mut s = String::from("position,time,mode");
    for v in &h.variables {
        s.push(',');
        s.push_str(v);
    }
    s.push('\n');
    for j in 0..t.len() {
        let _ = write!(s, "{j},{},{}", j as f64 * h.delta, h.modes[t.mode(j)].name);
        for x in t.state(j) {
            let _ = write!(s, ",{x}");
        }
        s.push('\n');
    }
    fs::write(path, s)
}

// ---------------------------------------------------------------------------
// reference table

/// Largest stopping index accepted for rows expected to be violated. The
/// violation index is random; the reference table reports 1.
pub const MAX_FALSE_ROW_SAMPLES: usize = 5;

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub only: Option<Study>,
    pub delta: f64,
    pub alpha: f64,
    pub points: usize,
    pub substeps: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            only: None,
            delta: 0.01,
            alpha: 0.01,
            points: 10,
            substeps: 10,
            seed: 0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub property: &'static str,
    pub condition: &'static str,
    pub scenario: String,
    pub expected_holds: bool,
    pub expected_samples: usize,
    pub holds: Option<bool>,
    pub samples: usize,
    pub matches: bool,
    pub error: Option<String>,
    pub seconds: f64,
}

/// Rows of the reference table selected by `only`.
pub fn table_rows(only: Option<Study>) -> Vec<PropertyRow> {
    property_suite()
        .into_iter()
        .filter(|r| only.map_or(true, |s| s == r.study))
        .collect()
}

pub fn run_table_row(row: &PropertyRow, opts: &TableOptions) -> Result<TableRow, CliError> {
    let h = builtin_model(&row.scenario)?;
    let f = row.step_formula(&h)?;
    let mut scfg = SamplerConfig::new(h.horizon, opts.seed);
    scfg.points = opts.points;
    scfg.flow.substeps = opts.substeps;
    let mut cfg = SmcConfig::new(opts.delta, opts.alpha, opts.seed);
    cfg.threads = opts.threads;
    let v = run_smc(&h, &f, &cfg, scfg)?;
    let holds = match v.decision {
        Decision::H0 => Some(true),
        Decision::H1 => Some(false),
        Decision::Inconclusive => None,
    };
    let expected_samples = if row.expected_holds {
        sample_size(opts.delta, opts.alpha)?
    } else {
        row.expected_samples
    };
    Ok(TableRow {
        property: row.property,
        condition: row.condition,
        scenario: row.scenario.clone(),
        expected_holds: row.expected_holds,
        expected_samples,
        holds,
        samples: v.samples,
        matches: holds == Some(row.expected_holds)
            && if row.expected_holds {
                v.samples == expected_samples
            } else {
                v.samples <= MAX_FALSE_ROW_SAMPLES
            },
        error: v.error.map(|e| e.to_string()),
        seconds: v.seconds,
    })
}

/// Runs the selected rows in order, reporting each as it finishes.
pub fn run_table(opts: &TableOptions, mut progress: impl FnMut(&TableRow)) -> Result<Vec<TableRow>, CliError> {
    let mut out = Vec::new();
    for row in table_rows(opts.only) {
        let r = run_table_row(&row, opts)?;
        progress(&r);
        out.push(r);
    }
    Ok(out)
}

pub fn render_table_row(r: &TableRow) -> String {
    let verdict = |h: Option<bool>| match h {
        Some(true) => "True",
        Some(false) => "False",
        None => "n/a",
    };
    format!(
        "{:<4} {:<30} {:<6} {:>6}   {:<6} {:>6}   {:<8} {:>8.1}s",
        r.property,
        r.condition,
        verdict(Some(r.expected_holds)),
        r.expected_samples,
        verdict(r.holds),
        r.samples,
        if r.matches { "match" } else { "MISMATCH" },
        r.seconds
    )
}

pub fn table_header() -> String {
    format!(
        "{:<4} {:<30} {:<6} {:>6}   {:<6} {:>6}   {:<8} {:>9}",
        "prop", "condition", "expect", "n", "got", "n", "status", "time"
    )
}

// ---------------------------------------------------------------------------
// calibration

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub schema: u32,
    pub p: f64,
    pub delta: f64,
    pub alpha: f64,
    pub required: usize,
    pub repetitions: usize,
    pub h0: usize,
    pub h1: usize,
    pub false_negatives: usize,
    pub h0_rate: f64,
    pub expected_h0_rate: f64,
    /// Upper limit on the H0 rate when `p <= 1 - delta`.
    pub alpha_bound: f64,
    pub median_samples_h1: Option<f64>,
}

pub fn calibrate(p: f64, delta: f64, alpha: f64, repetitions: usize, seed: u64) -> Result<CalibrationSummary, CliError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(CliError::Usage(format!("--p must lie in [0, 1], got {p}")));
    }
    let CalibrationReport {
        p,
        delta,
        alpha,
        required,
        repetitions,
        h0,
        h1,
        false_negatives,
        h0_rate,
        expected_h0_rate,
        median_samples_h1,
    } = calibration_report(delta, alpha, p, repetitions, seed)?;
    Ok(CalibrationSummary {
        schema: SCHEMA,
        p,
        delta,
        alpha,
        required,
        repetitions,
        h0,
        h1,
        false_negatives,
        h0_rate,
        expected_h0_rate,
        alpha_bound: alpha,
        median_samples_h1,
    })
}

pub fn render_calibration(c: &CalibrationSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p = {}, delta = {}, alpha = {}, N = {}", c.p, c.delta, c.alpha, c.required);
    let _ = writeln!(s, "runs: {} (H0 {}, H1 {})", c.repetitions, c.h0, c.h1);
    let _ = writeln!(s, "H0 rate: observed {:.4}, exact {:.4}", c.h0_rate, c.expected_h0_rate);
    if c.p <= 1.0 - c.delta {
        let _ = writeln!(s, "bound: H0 rate should not exceed alpha = {}", c.alpha);
    }
    if c.p >= 1.0 {
        let _ = writeln!(s, "false negatives: {}", c.false_negatives);
    }
    if let Some(m) = c.median_samples_h1 {
        let _ = writeln!(s, "median samples to H1: {m}");
    }
    s
}

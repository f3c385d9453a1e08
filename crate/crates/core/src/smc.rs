//! Sequential hypothesis test for `Pr(psi) = 1` against `Pr(psi) < 1 - delta`.
//!
//! Up to `N = ceil(log alpha / log(1 - delta))` samples are drawn in index
//! order. The first violation accepts H1; `N` satisfying samples accept H0.
//! Draws run in parallel batches, but the outcome is always the one a serial
//! run would produce: the reported stop is the lowest stopping index.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::bltl::{horizon, BltlError, Formula, Monitor, Tri};
use crate::model::HybridAutomaton;
use crate::sampler::{trajectory_rng, SampleError, Sampler, SamplerConfig, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SmcError {
    #[error("delta must lie in (0, 1), got {0}")]
    Delta(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("property horizon {horizon} exceeds trajectory length K = {steps}")]
    Horizon { horizon: usize, steps: usize },
    #[error(transparent)]
    Bltl(#[from] BltlError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmcConfig {
    pub delta: f64,
    pub alpha: f64,
    pub seed: u64,
    pub threads: usize,
}

impl SmcConfig {
    pub fn new(delta: f64, alpha: f64, seed: u64) -> Self {
        SmcConfig {
            delta,
            alpha,
            seed,
            threads: 1,
        }
    }
}

/// Number of samples needed so that accepting H0 under H1 has probability
/// at most `alpha`.
pub fn sample_size(delta: f64, alpha: f64) -> Result<usize, SmcError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(SmcError::Delta(delta));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SmcError::Alpha(alpha));
    }
    let ratio = alpha.ln() / (1.0 - delta).ln();
    // guard against ratios that land a hair above an integer by rounding
    let nearest = ratio.round();
    let n = if (ratio - nearest).abs() < 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok((n as usize).max(1))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome<W> {
    Satisfied,
    Violated(W),
}

/// Anything that can produce independent indexed samples of a property.
pub trait SampleSource: Sync {
    type Witness: Send;
    fn draw(&self, index: u64) -> Result<Outcome<Self::Witness>, SampleError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    H0,
    H1,
    /// A sample could not be produced (e.g. the integrator blew up).
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub satisfied: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct TestResult<W> {
    pub decision: Decision,
    /// Samples consumed in logical order, including the stopping one.
    pub samples: usize,
    pub required: usize,
    pub witness: Option<W>,
    pub error: Option<SampleError>,
    /// One record per consumed sample.
    pub log: Vec<SampleRecord>,
    pub seconds: f64,
}

/// Runs the sequential test over `source` with `threads` workers.
pub fn run_test<S: SampleSource>(
    source: &S,
    delta: f64,
    alpha: f64,
    threads: usize,
) -> Result<TestResult<S::Witness>, SmcError> {
    let required = sample_size(delta, alpha)?;
    let threads = threads.max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| SmcError::Pool(e.to_string()))?;
    let start = Instant::now();
    let batch = if threads == 1 { 1 } else { threads * 4 };
    let lowest_stop = AtomicU64::new(u64::MAX);
    let mut log = Vec::new();
    let mut next = 0usize;
    while next < required {
        let end = (next + batch).min(required);
        let results: Vec<Option<(Result<Outcome<S::Witness>, SampleError>, f64)>> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| {
                    let i = i as u64;
                    if i > lowest_stop.load(Ordering::Relaxed) {
                        return None;
                    }
                    let t = Instant::now();
                    let r = source.draw(i);
                    if !matches!(r, Ok(Outcome::Satisfied)) {
                        lowest_stop.fetch_min(i, Ordering::Relaxed);
                    }
                    Some((r, t.elapsed().as_secs_f64()))
                })
                .collect()
        });
        for r in results {
            // every index before the lowest stop was drawn
            let (r, seconds) = r.expect("skipped draw before the stopping index");
            match r {
                Ok(Outcome::Satisfied) => log.push(SampleRecord {
                    satisfied: true,
                    seconds,
                }),
                Ok(Outcome::Violated(w)) => {
                    log.push(SampleRecord {
                        satisfied: false,
                        seconds,
                    });
                    return Ok(TestResult {
                        decision: Decision::H1,
                        samples: log.len(),
                        required,
                        witness: Some(w),
                        error: None,
                        log,
                        seconds: start.elapsed().as_secs_f64(),
                    });
                }
                Err(e) => {
                    return Ok(TestResult {
                        decision: Decision::Inconclusive,
                        samples: log.len() + 1,
                        required,
                        witness: None,
                        error: Some(e),
                        log,
                        seconds: start.elapsed().as_secs_f64(),
                    });
                }
            }
        }
        next = end;
    }
    Ok(TestResult {
        decision: Decision::H0,
        samples: required,
        required,
        witness: None,
        error: None,
        log,
        seconds: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// automata

/// Samples trajectories and checks a property on each, stopping simulation
/// as soon as the verdict at position 0 is decided.
pub struct TrajectorySource {
    sampler: Sampler,
    monitor: Monitor,
    horizon: usize,
    chunk: usize,
}

impl TrajectorySource {
    pub fn new(h: &HybridAutomaton, formula: &Formula, mut cfg: SamplerConfig) -> Result<Self, SmcError> {
        let hz = horizon(formula);
        if hz > cfg.steps {
            return Err(SmcError::Horizon {
                horizon: hz,
                steps: cfg.steps,
            });
        }
        if formula.has_quantitative_atoms() {
            cfg.robust = true;
            cfg.constants = formula.constants(&h.variables)?;
        }
        let monitor = Monitor::new(formula, h, cfg.steps + 1)?;
        Ok(TrajectorySource {
            sampler: Sampler::new(h, cfg)?,
            monitor,
            horizon: hz,
            chunk: (hz / 32).max(64),
        })
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }
}

impl SampleSource for TrajectorySource {
    type Witness = Trajectory;

    fn draw(&self, index: u64) -> Result<Outcome<Trajectory>, SampleError> {
        let total = self.sampler.config().steps;
        let mut sim = self.sampler.simulation(index);
        let mut monitor = self.monitor.clone();
        loop {
            let target = (sim.position() + self.chunk).min(total);
            while sim.position() < target {
                sim.step()?;
            }
            monitor.extend(sim.trajectory());
            match monitor.verdict() {
                Tri::True => return Ok(Outcome::Satisfied),
                Tri::False => {
                    // keep the witness long enough for a standalone check
                    while sim.position() < self.horizon.min(total) {
                        sim.step()?;
                    }
                    return Ok(Outcome::Violated(sim.into_trajectory()));
                }
                Tri::Unknown if sim.position() >= total => {
                    unreachable!("verdict undecided on a complete trajectory")
                }
                Tri::Unknown => {}
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub decision: Decision,
    pub samples: usize,
    pub required: usize,
    pub counterexample: Option<Trajectory>,
    pub error: Option<SampleError>,
    pub log: Vec<SampleRecord>,
    pub seconds: f64,
}

/// Decides `psi` on `h`. Quantitative atoms switch on robust sampling.
pub fn run_smc(
    h: &HybridAutomaton,
    psi: &Formula,
    cfg: &SmcConfig,
    sampler_cfg: SamplerConfig,
) -> Result<Verdict, SmcError> {
    let mut sampler_cfg = sampler_cfg;
    sampler_cfg.seed = cfg.seed;
    let source = TrajectorySource::new(h, psi, sampler_cfg)?;
    let r = run_test(&source, cfg.delta, cfg.alpha, cfg.threads)?;
    Ok(Verdict {
        decision: r.decision,
        samples: r.samples,
        required: r.required,
        counterexample: r.witness,
        error: r.error,
        log: r.log,
        seconds: r.seconds,
    })
}

// ---------------------------------------------------------------------------
// calibration

/// Synthetic source satisfied with probability `p` per sample.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliSource {
    pub p: f64,
    pub seed: u64,
}

impl SampleSource for BernoulliSource {
    type Witness = u64;

    fn draw(&self, index: u64) -> Result<Outcome<u64>, SampleError> {
        let u: f64 = trajectory_rng(self.seed, index).gen();
        Ok(if u < self.p {
            Outcome::Satisfied
        } else {
            Outcome::Violated(index)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationReport {
    pub p: f64,
    pub delta: f64,
    pub alpha: f64,
    pub required: usize,
    pub repetitions: usize,
    pub h0: usize,
    pub h1: usize,
    /// H1 verdicts when every sample satisfies the property.
    pub false_negatives: usize,
    pub h0_rate: f64,
    /// `p^N`, the exact probability of accepting H0.
    pub expected_h0_rate: f64,
    pub median_samples_h1: Option<f64>,
}

/// Repeats the test on Bernoulli sources with satisfaction probability `p`.
pub fn calibration_report(
    delta: f64,
    alpha: f64,
    p: f64,
    repetitions: usize,
    seed: u64,
) -> Result<CalibrationReport, SmcError> {
    let required = sample_size(delta, alpha)?;
    let mut h0 = 0;
    let mut stops = Vec::new();
    for r in 0..repetitions {
        let source = BernoulliSource {
            p,
            seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64),
        };
        let t = run_test(&source, delta, alpha, 1)?;
        match t.decision {
            Decision::H0 => h0 += 1,
            _ => stops.push(t.samples as f64),
        }
    }
    let h1 = stops.len();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = match stops.len() {
        0 => None,
        n if n % 2 == 1 => Some(stops[n / 2]),
        n => Some((stops[n / 2 - 1] + stops[n / 2]) / 2.0),
    };
    Ok(CalibrationReport {
        p,
        delta,
        alpha,
        required,
        repetitions,
        h0,
        h1,
        false_negatives: if p >= 1.0 { h1 } else { 0 },
        h0_rate: h0 as f64 / repetitions.max(1) as f64,
        expected_h0_rate: p.powi(required as i32),
        median_samples_h1: median,
    })
}

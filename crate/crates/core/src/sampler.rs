//! Random trajectory generation.
//!
//! Each step draws `J` uniform time points in `(0, 1)`, simulates the
//! current mode to each of them and collects, per outgoing transition, the
//! points where its guard holds. A (transition, point) pair is then drawn
//! uniformly among all enabled pairs, which picks transition `l` with
//! probability `|T_l| / sum |T_i|` and its switch time uniformly in `T_l`.
//! The target mode then runs for the remainder of the step. With no enabled
//! pair the current mode runs for the whole step.

use rand::distributions::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flow::{CompiledSystem, FlowConfig, FlowError, Integrator};
use crate::model::{guard_sat, Guard, HybridAutomaton};

/// Consecutive rejected draws tolerated by the robust sampler.
pub const MAX_ROBUST_REPEATS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("robust sampling rejected {repeats} consecutive draws at step {step}; the model keeps hitting a property constant")]
    Degenerate { step: usize, repeats: usize },
    #[error("invalid sampler configuration: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Intermediate time points per step.
    pub points: usize,
    /// Number of steps; trajectories have `steps + 1` states.
    pub steps: usize,
    pub flow: FlowConfig,
    pub seed: u64,
    pub robust: bool,
    /// Per-variable constants that robust trajectories must avoid exactly.
    pub constants: Vec<Vec<f64>>,
}

impl SamplerConfig {
    pub fn new(steps: usize, seed: u64) -> Self {
        SamplerConfig {
            points: 10,
            steps,
            flow: FlowConfig::default(),
            seed,
            robust: false,
            constants: Vec::new(),
        }
    }
}

/// The stream used for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Index into the automaton's transition list, `None` for no switch.
    pub transition: Option<usize>,
    /// Normalized switch time within the step.
    pub switch_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub modes: Vec<usize>,
    /// Row-major value states, `dim` per position.
    pub states: Vec<f64>,
    /// `steps[k]` describes the move from position `k` to `k + 1`.
    pub steps: Vec<StepRecord>,
    pub seed: u64,
    pub index: u64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, j: usize) -> usize {
        self.modes[j]
    }

    pub fn state(&self, j: usize) -> &[f64] {
        &self.states[j * self.dim..(j + 1) * self.dim]
    }
}

#[derive(Debug, Clone)]
struct Outgoing {
    transition: usize,
    target: usize,
    guard: Guard,
}

/// Compiled automaton plus configuration, shareable across threads.
#[derive(Debug, Clone)]
pub struct Sampler {
    system: CompiledSystem,
    outgoing: Vec<Vec<Outgoing>>,
    init: Vec<(f64, f64)>,
    initial_mode: usize,
    cfg: SamplerConfig,
}

impl Sampler {
    pub fn new(h: &HybridAutomaton, cfg: SamplerConfig) -> Result<Self, SampleError> {
        if cfg.points == 0 {
            return Err(SampleError::Config("J must be at least 1".into()));
        }
        if cfg.steps == 0 {
            return Err(SampleError::Config("K must be at least 1".into()));
        }
        if !cfg.constants.is_empty() && cfg.constants.len() != h.dim() {
            return Err(SampleError::Config("one constant set per variable expected".into()));
        }
        let mut outgoing = vec![Vec::new(); h.modes.len()];
        for (i, t) in h.transitions.iter().enumerate() {
            outgoing[t.source].push(Outgoing {
                transition: i,
                target: t.target,
                guard: t.guard.clone(),
            });
        }
        let system = CompiledSystem::new(h)?;
        if cfg.flow.substeps == 0 {
            return Err(FlowError::NoSubsteps.into());
        }
        Ok(Sampler {
            system,
            outgoing,
            init: h.init.intervals.clone(),
            initial_mode: h.initial_mode,
            cfg,
        })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn system(&self) -> &CompiledSystem {
        &self.system
    }

    /// Starts trajectory `index` of the configured seed.
    pub fn simulation(&self, index: u64) -> Simulation<'_> {
        Simulation::new(self, index)
    }

    /// Samples trajectory `index` to the full configured length.
    pub fn sample(&self, index: u64) -> Result<Trajectory, SampleError> {
        let mut sim = self.simulation(index);
        while sim.position() < self.cfg.steps {
            sim.step()?;
        }
        Ok(sim.into_trajectory())
    }

    fn avoids_constants(&self, v: &[f64]) -> bool {
        !self.cfg.robust
            || self
                .cfg
                .constants
                .iter()
                .zip(v)
                .all(|(cs, x)| !cs.iter().any(|c| c == x))
    }

    fn draw_initial(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>, SampleError> {
        for _ in 0..MAX_ROBUST_REPEATS {
            let v: Vec<f64> = self
                .init
                .iter()
                .map(|&(lo, hi)| {
                    // retry the rare draws that round onto an endpoint
                    loop {
                        let u: f64 = Open01.sample(rng);
                        let x = lo + u * (hi - lo);
                        if lo < x && x < hi {
                            return x;
                        }
                    }
                })
                .collect();
            if self.avoids_constants(&v) {
                return Ok(v);
            }
        }
        Err(SampleError::Degenerate {
            step: 0,
            repeats: MAX_ROBUST_REPEATS,
        })
    }

    /// One step from `(mode, v)` starting at step index `step`. Writes the
    /// successor state and returns the successor mode and step record.
    fn step_once(
        &self,
        it: &mut Integrator<'_>,
        scratch: &mut StepScratch,
        rng: &mut ChaCha8Rng,
        mode: usize,
        v: &[f64],
        step: usize,
        next: &mut [f64],
    ) -> Result<(usize, StepRecord), SampleError> {
        let global = step as f64 * self.system.delta();
        let outs = &self.outgoing[mode];
        let j = self.cfg.points;
        scratch.times.clear();
        scratch.times.extend((0..j).map(|_| -> f64 { Open01.sample(rng) }));
        scratch.times.sort_by(|a: &f64, b| a.partial_cmp(b).unwrap());

        it.start(mode, v, global);
        let n = v.len();
        scratch.points.resize(j * n, 0.0);
        for (i, &t) in scratch.times.iter().enumerate() {
            it.branch(t, &mut scratch.points[i * n..(i + 1) * n])?;
        }

        // enabled (transition, point) pairs in transition-major order
        scratch.enabled.clear();
        for (slot, o) in outs.iter().enumerate() {
            for i in 0..j {
                if guard_sat(&o.guard, &scratch.points[i * n..(i + 1) * n]) {
                    scratch.enabled.push((slot, i));
                }
            }
        }
        if scratch.enabled.is_empty() {
            it.branch(1.0, next)?;
            return Ok((
                mode,
                StepRecord {
                    transition: None,
                    switch_time: None,
                },
            ));
        }
        let pick = rng.gen_range(0..scratch.enabled.len());
        let (slot, i) = scratch.enabled[pick];
        let o = &outs[slot];
        let t_switch = scratch.times[i];
        let rest = 1.0 - t_switch;
        let at_switch = &scratch.points[i * n..(i + 1) * n];
        if rest > 0.0 {
            it.start(o.target, at_switch, global + t_switch * self.system.delta());
            it.branch(rest, next)?;
        } else {
            next.copy_from_slice(at_switch);
        }
        Ok((
            o.target,
            StepRecord {
                transition: Some(o.transition),
                switch_time: Some(t_switch),
            },
        ))
    }

    /// Frequency of each outgoing transition of `mode` (in declaration
    /// order) being chosen from `v` over `trials` independent steps; the last
    /// entry is the no-switch frequency.
    pub fn empirical_guard_probs(
        &self,
        mode: usize,
        v: &[f64],
        step: usize,
        rng: &mut ChaCha8Rng,
        trials: usize,
    ) -> Result<Vec<f64>, SampleError> {
        let outs = &self.outgoing[mode];
        let mut counts = vec![0usize; outs.len() + 1];
        let mut it = Integrator::new(&self.system, self.cfg.flow)?;
        let mut scratch = StepScratch::default();
        let mut next = vec![0.0; v.len()];
        for _ in 0..trials {
            let (_, rec) = self.step_once(&mut it, &mut scratch, rng, mode, v, step, &mut next)?;
            match rec.transition {
                Some(t) => counts[outs.iter().position(|o| o.transition == t).unwrap()] += 1,
                None => counts[outs.len()] += 1,
            }
        }
        Ok(counts.iter().map(|&c| c as f64 / trials.max(1) as f64).collect())
    }
}

#[derive(Debug, Default)]
struct StepScratch {
    times: Vec<f64>,
    points: Vec<f64>,
    enabled: Vec<(usize, usize)>,
}

/// A trajectory under construction, extended one step at a time.
pub struct Simulation<'a> {
    sampler: &'a Sampler,
    rng: ChaCha8Rng,
    integrator: Integrator<'a>,
    scratch: StepScratch,
    traj: Trajectory,
    init_error: Option<SampleError>,
}

impl<'a> Simulation<'a> {
    fn new(sampler: &'a Sampler, index: u64) -> Self {
        let mut rng = trajectory_rng(sampler.cfg.seed, index);
        let dim = sampler.system.dim();
        let integrator = Integrator::new(&sampler.system, sampler.cfg.flow).expect("substeps checked at construction");
        let (states, init_error) = match sampler.draw_initial(&mut rng) {
            Ok(v) => (v, None),
            Err(e) => (vec![f64::NAN; dim], Some(e)),
        };
        let mut traj = Trajectory {
            dim,
            modes: Vec::with_capacity(sampler.cfg.steps + 1),
            states: Vec::with_capacity((sampler.cfg.steps + 1) * dim),
            steps: Vec::with_capacity(sampler.cfg.steps),
            seed: sampler.cfg.seed,
            index,
        };
        traj.modes.push(sampler.initial_mode);
        traj.states.extend(states);
        Simulation {
            sampler,
            rng,
            integrator,
            scratch: StepScratch::default(),
            traj,
            init_error,
        }
    }

    /// Index of the last computed position.
    pub fn position(&self) -> usize {
        self.traj.len() - 1
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn into_trajectory(self) -> Trajectory {
        self.traj
    }

    /// Appends one position.
    pub fn step(&mut self) -> Result<(), SampleError> {
        if let Some(e) = &self.init_error {
            return Err(e.clone());
        }
        let k = self.position();
        let n = self.traj.dim;
        let mode = self.traj.modes[k];
        let v: Vec<f64> = self.traj.state(k).to_vec();
        let mut next = vec![0.0; n];
        for _ in 0..MAX_ROBUST_REPEATS {
            let (m, rec) = self.sampler.step_once(
                &mut self.integrator,
                &mut self.scratch,
                &mut self.rng,
                mode,
                &v,
                k,
                &mut next,
            )?;
            if self.sampler.avoids_constants(&next) {
                self.traj.modes.push(m);
                self.traj.states.extend_from_slice(&next);
                self.traj.steps.push(rec);
                return Ok(());
            }
        }
        Err(SampleError::Degenerate {
            step: k + 1,
            repeats: MAX_ROBUST_REPEATS,
        })
    }
}

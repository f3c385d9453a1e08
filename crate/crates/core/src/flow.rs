//! Fixed-step RK4 realization of the unit-interval mode flows.
//!
//! Time is normalized so one step of the automaton is the interval `[0, 1]`;
//! the integrator solves `dx/ds = delta * F_q(x, input(t0 + s * delta))` with
//! step `1 / substeps` on the grid `k / substeps`, shortening only the final
//! step. Inputs are held at their value at the start of each RK4 step.

use thiserror::Error;

use crate::expr::{ExprError, Program, Slot, SymbolKind};
use crate::model::{input_value, HybridAutomaton, InputSignal, ModelError};

/// States with a coordinate above this magnitude count as a blow-up.
pub const BLOW_UP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowConfig {
    pub substeps: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig { substeps: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("state blew up in mode `{mode}` at model time {time}")]
    BlowUp { mode: String, time: f64 },
    #[error("mode `{mode}` at model time {time}: {source}")]
    Domain {
        mode: String,
        time: f64,
        source: ExprError,
    },
    #[error(transparent)]
    Input(#[from] ModelError),
    #[error("flow time {0} outside (0, 1]")]
    BadTime(f64),
    #[error("substeps must be at least 1")]
    NoSubsteps,
    #[error("failed to compile mode `{mode}`: {source}")]
    Compile { mode: String, source: ExprError },
}

#[derive(Debug, Clone)]
struct CompiledMode {
    name: String,
    rhs: Vec<Program>,
}

/// Vector fields of every mode compiled to stack programs, with parameters
/// (including mode-local overrides) folded in as constants.
#[derive(Debug, Clone)]
pub struct CompiledSystem {
    dim: usize,
    delta: f64,
    modes: Vec<CompiledMode>,
    inputs: Vec<InputSignal>,
    stack_size: usize,
}

impl CompiledSystem {
    pub fn new(h: &HybridAutomaton) -> Result<Self, FlowError> {
        let mut modes = Vec::with_capacity(h.modes.len());
        let mut stack_size = 1;
        for m in &h.modes {
            let resolve = |name: &str, kind: SymbolKind| -> Option<Slot> {
                match kind {
                    SymbolKind::Variable => h.var_index(name).map(Slot::State),
                    SymbolKind::Input => h.inputs.iter().position(|i| i.name == name).map(Slot::Input),
                    SymbolKind::Parameter => m
                        .constants
                        .iter()
                        .find(|(c, _)| c == name)
                        .map(|(_, v)| *v)
                        .or_else(|| h.parameter(name))
                        .map(Slot::Const),
                }
            };
            let mut rhs = Vec::with_capacity(m.rhs.len());
            for e in &m.rhs {
                let p = Program::compile(e, &resolve).map_err(|source| FlowError::Compile {
                    mode: m.name.clone(),
                    source,
                })?;
                stack_size = stack_size.max(p.max_stack());
                rhs.push(p);
            }
            modes.push(CompiledMode {
                name: m.name.clone(),
                rhs,
            });
        }
        Ok(CompiledSystem {
            dim: h.dim(),
            delta: h.delta,
            modes,
            inputs: h.inputs.clone(),
            stack_size,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mode_name(&self, mode: usize) -> &str {
        &self.modes[mode].name
    }

    /// `Φ_q(t, v)`: state after normalized time `t` in `mode`, starting at
    /// model time `global_time`.
    pub fn flow(
        &self,
        mode: usize,
        t: f64,
        v: &[f64],
        global_time: f64,
        cfg: FlowConfig,
    ) -> Result<Vec<f64>, FlowError> {
        if !(t > 0.0 && t <= 1.0) {
            return Err(FlowError::BadTime(t));
        }
        let mut it = Integrator::new(self, cfg)?;
        it.start(mode, v, global_time);
        let mut out = vec![0.0; self.dim];
        it.branch(t, &mut out)?;
        Ok(out)
    }

    /// `flow` at each of the sorted `times`, from one sequential integration.
    /// Results are bitwise identical to separate `flow` calls.
    pub fn flow_at_points(
        &self,
        mode: usize,
        times: &[f64],
        v: &[f64],
        global_time: f64,
        cfg: FlowConfig,
    ) -> Result<Vec<Vec<f64>>, FlowError> {
        if let Some(&t) = times.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
            return Err(FlowError::BadTime(t));
        }
        if times.windows(2).any(|w| w[1] < w[0]) {
            return Err(FlowError::BadTime(f64::NAN));
        }
        let mut it = Integrator::new(self, cfg)?;
        it.start(mode, v, global_time);
        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let mut x = vec![0.0; self.dim];
            it.branch(t, &mut x)?;
            out.push(x);
        }
        Ok(out)
    }
}

/// Reusable RK4 integrator over one unit interval.
///
/// After `start`, the main state sits on the grid point `k / substeps`.
/// `branch(t)` first advances the main grid to the last grid point not
/// after `t`, then takes a shortened step to `t` on a copy.
pub struct Integrator<'a> {
    sys: &'a CompiledSystem,
    substeps: usize,
    mode: usize,
    t0: f64,
    k: usize,
    x: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    comp: Vec<f64>,
    incr: Vec<f64>,
    stage: Vec<f64>,
    inputs: Vec<f64>,
    stack: Vec<f64>,
}

impl<'a> Integrator<'a> {
    pub fn new(sys: &'a CompiledSystem, cfg: FlowConfig) -> Result<Self, FlowError> {
        if cfg.substeps == 0 {
            return Err(FlowError::NoSubsteps);
        }
        let n = sys.dim;
        Ok(Integrator {
            sys,
            substeps: cfg.substeps,
            mode: 0,
            t0: 0.0,
            k: 0,
            x: vec![0.0; n],
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            comp: vec![0.0; n],
            incr: vec![0.0; n],
            stage: vec![0.0; n],
            inputs: vec![0.0; sys.inputs.len()],
            stack: Vec::with_capacity(sys.stack_size),
        })
    }

    pub fn start(&mut self, mode: usize, v: &[f64], global_time: f64) {
        self.mode = mode;
        self.t0 = global_time;
        self.k = 0;
        self.x.copy_from_slice(v);
        self.comp.fill(0.0);
    }

    /// Normalized time of the main grid state.
    pub fn time(&self) -> f64 {
        self.k as f64 / self.substeps as f64
    }

    pub fn state(&self) -> &[f64] {
        &self.x
    }

    fn grid(&self, k: usize) -> f64 {
        k as f64 / self.substeps as f64
    }

    /// Takes full grid steps while the next grid point is at or before `t`.
    pub fn advance_to(&mut self, t: f64) -> Result<(), FlowError> {
        let h = 1.0 / self.substeps as f64;
        while self.grid(self.k + 1) <= t {
            let s = self.grid(self.k);
            let x = std::mem::take(&mut self.x);
            let mut incr = std::mem::take(&mut self.incr);
            let r = self.rk4(&x, s, h, &mut incr);
            self.x = x;
            r?;
            // compensated sum keeps long runs of small increments exact
            for i in 0..self.x.len() {
                let y = incr[i] - self.comp[i];
                let sum = self.x[i] + y;
                self.comp[i] = (sum - self.x[i]) - y;
                self.x[i] = sum;
            }
            self.incr = incr;
            self.k += 1;
            self.check(s + h)?;
        }
        Ok(())
    }

    /// State at normalized time `t >= time()`, leaving the main grid at the
    /// last grid point not after `t`.
    pub fn branch(&mut self, t: f64, out: &mut [f64]) -> Result<(), FlowError> {
        self.advance_to(t)?;
        let s = self.time();
        let len = t - s;
        if len > 0.0 {
            let x = std::mem::take(&mut self.x);
            let mut incr = std::mem::take(&mut self.incr);
            let r = self.rk4(&x, s, len, &mut incr);
            self.x = x;
            for i in 0..out.len() {
                out[i] = self.x[i] + (incr[i] - self.comp[i]);
            }
            self.incr = incr;
            r?;
            if out.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
                return Err(self.blow_up(t));
            }
        } else {
            out.copy_from_slice(&self.x);
        }
        Ok(())
    }

    fn blow_up(&self, s: f64) -> FlowError {
        FlowError::BlowUp {
            mode: self.sys.modes[self.mode].name.clone(),
            time: self.t0 + s * self.sys.delta,
        }
    }

    fn check(&self, s: f64) -> Result<(), FlowError> {
        if self.x.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP) {
            return Err(self.blow_up(s));
        }
        Ok(())
    }

    fn deriv(&mut self, x: &[f64], which: usize) -> Result<(), FlowError> {
        let m = &self.sys.modes[self.mode];
        let dst = match which {
            1 => &mut self.k1,
            2 => &mut self.k2,
            3 => &mut self.k3,
            _ => &mut self.k4,
        };
        for (d, p) in dst.iter_mut().zip(&m.rhs) {
            *d = self.sys.delta * p.eval(x, &self.inputs, &mut self.stack).map_err(|source| FlowError::Domain {
                mode: m.name.clone(),
                time: self.t0,
                source,
            })?;
        }
        Ok(())
    }

    fn rk4(&mut self, x: &[f64], s: f64, h: f64, incr: &mut [f64]) -> Result<(), FlowError> {
        let t_model = self.t0 + s * self.sys.delta;
        for (slot, sig) in self.inputs.iter_mut().zip(&self.sys.inputs) {
            *slot = input_value(sig, t_model)?;
        }
        let n = x.len();
        let mut y = std::mem::take(&mut self.stage);
        let r = (|| -> Result<(), FlowError> {
            self.deriv(x, 1)?;
            for i in 0..n {
                y[i] = x[i] + 0.5 * h * self.k1[i];
            }
            self.deriv(&y, 2)?;
            for i in 0..n {
                y[i] = x[i] + 0.5 * h * self.k2[i];
            }
            self.deriv(&y, 3)?;
            for i in 0..n {
                y[i] = x[i] + h * self.k3[i];
            }
            self.deriv(&y, 4)?;
            for i in 0..n {
                incr[i] = h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
            }
            Ok(())
        })();
        self.stage = y;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    fn system(odes: &[&str], delta: f64) -> CompiledSystem {
        let vars: Vec<String> = (0..odes.len()).map(|i| format!("x{i}")).collect();
        let mut doc = format!("delta {delta}\nhorizon 10\n[variables]\n{}\n", vars.join(" "));
        doc.push_str("[parameters]\nk = -1\n[inputs]\nstim = 0: 1; 0.5: 0\n[init]\ndistribution = uniform\n");
        for v in &vars {
            doc.push_str(&format!("{v} = (0, 1)\n"));
        }
        doc.push_str("[modes]\nmode q0\n");
        for (v, e) in vars.iter().zip(odes) {
            doc.push_str(&format!("  ode {v} = {e}\n"));
        }
        CompiledSystem::new(&parse_model(&doc).unwrap()).unwrap()
    }

    fn exp_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..40 {
            term *= x / n as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn constant_field_is_exact() {
        let sys = system(&["1"], 1.0);
        assert_eq!(sys.flow(0, 0.5, &[0.0], 0.0, FlowConfig::default()).unwrap(), vec![0.5]);
        let pts = sys
            .flow_at_points(0, &[0.25, 0.75], &[0.0], 0.0, FlowConfig::default())
            .unwrap();
        assert_eq!(pts, vec![vec![0.25], vec![0.75]]);
        assert!(sys
            .flow_at_points(0, &[], &[0.0], 0.0, FlowConfig::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn linear_fields_match_exponentials() {
        let decay = system(&["k * x0"], 1.0);
        let v = decay.flow(0, 1.0, &[1.0], 0.0, FlowConfig::default()).unwrap()[0];
        assert!((v - exp_series(-1.0)).abs() < 1e-6);
        let growth = system(&["x0"], 1.0);
        let v = growth.flow(0, 1.0, &[1.0], 0.0, FlowConfig::default()).unwrap()[0];
        assert!((v - exp_series(1.0)).abs() < 1e-6);

        let eps = 1e-6;
        let pts = decay
            .flow_at_points(0, &[0.5, 1.0 - eps], &[1.0], 0.0, FlowConfig::default())
            .unwrap();
        assert!((pts[0][0] - exp_series(-0.5)).abs() < 1e-6);
        assert!((pts[1][0] - exp_series(-(1.0 - eps))).abs() < 1e-6);
    }

    #[test]
    fn delta_scales_time() {
        let sys = system(&["1"], 0.1);
        let v = sys.flow(0, 1.0, &[0.0], 0.0, FlowConfig::default()).unwrap()[0];
        assert!((v - 0.1).abs() < 1e-12);
    }

    #[test]
    fn points_match_pointwise_flow_bitwise() {
        let sys = system(&["-x0 * x1 + stim", "tanh(x0) - 0.3 * x1"], 1.0);
        let cfg = FlowConfig { substeps: 7 };
        let times = [0.013, 0.2, 0.2, 0.5, 0.71428, 0.999];
        let v = [0.3, -1.2];
        let pts = sys.flow_at_points(0, &times, &v, 0.25, cfg).unwrap();
        for (t, p) in times.iter().zip(&pts) {
            assert_eq!(&sys.flow(0, *t, &v, 0.25, cfg).unwrap(), p);
        }
    }

    #[test]
    fn input_is_held_per_step() {
        // stim is 1 before model time 0.5 and 0 after; with one substep the
        // whole interval sees the start value.
        let sys = system(&["stim"], 1.0);
        let one = FlowConfig { substeps: 1 };
        assert_eq!(sys.flow(0, 1.0, &[0.0], 0.0, one).unwrap(), vec![1.0]);
        let two = FlowConfig { substeps: 2 };
        assert_eq!(sys.flow(0, 1.0, &[0.0], 0.0, two).unwrap(), vec![0.5]);
        assert_eq!(sys.flow(0, 1.0, &[0.0], 3.0, two).unwrap(), vec![0.0]);
    }

    #[test]
    fn errors() {
        let blow = system(&["x0 * x0"], 1.0);
        assert!(matches!(
            blow.flow(0, 1.0, &[1e7], 0.0, FlowConfig::default()),
            Err(FlowError::BlowUp { .. })
        ));
        let ln = system(&["ln(x0)"], 1.0);
        assert!(matches!(
            ln.flow(0, 1.0, &[-1.0], 0.0, FlowConfig::default()),
            Err(FlowError::Domain { .. })
        ));
        let id = system(&["1"], 1.0);
        assert!(matches!(id.flow(0, 0.0, &[0.0], 0.0, FlowConfig::default()), Err(FlowError::BadTime(_))));
        assert!(matches!(id.flow(0, 1.5, &[0.0], 0.0, FlowConfig::default()), Err(FlowError::BadTime(_))));
        assert!(matches!(
            id.flow(0, 1.0, &[0.0], 0.0, FlowConfig { substeps: 0 }),
            Err(FlowError::NoSubsteps)
        ));
        assert!(id
            .flow_at_points(0, &[0.5, 0.25], &[0.0], 0.0, FlowConfig::default())
            .is_err());
        assert!(matches!(
            id.flow(0, 1.0, &[0.0], -1.0, FlowConfig::default()),
            Err(FlowError::Input(_))
        ));
    }

    #[test]
    fn rk4_order() {
        let sys = system(&["-x0"], 1.0);
        let exact = exp_series(-1.0);
        let err = |n| (sys.flow(0, 1.0, &[1.0], 0.0, FlowConfig { substeps: n }).unwrap()[0] - exact).abs();
        for n in [2, 4, 8] {
            let ratio = err(n) / err(2 * n);
            assert!((8.0..=32.0).contains(&ratio), "n={n} ratio={ratio}");
        }
    }
}

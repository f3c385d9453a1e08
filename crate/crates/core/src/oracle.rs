//! Closed-form reference computations for validating the sampler and the
//! BLTL checker on small systems.
//!
//! An [`AnalyticSystem`] has one or two variables whose fields are constant
//! (`dx/dt = a`) or linear (`dx/dt = a x`) in every mode, conjunctive interval
//! guards and `delta = 1`, so flows and guard time sets invert exactly.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use crate::bltl::{Atom, Formula, StateTrace};
use crate::expr::{BinaryOp, Expr};
use crate::model::{Guard, HybridAutomaton, InitBox, Mode, Transition};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Field {
    /// `dx/dt = a`
    Constant(f64),
    /// `dx/dt = a x`
    Linear(f64),
}

impl Field {
    pub fn flow(self, t: f64, v: f64) -> f64 {
        match self {
            Field::Constant(a) => v + a * t,
            Field::Linear(a) => v * (a * t).exp(),
        }
    }

    /// Time at which the flow from `v` crosses `b`, or an infinite value on
    /// the side that keeps `{t | x(t) > b}` correct when `b` is never reached.
    /// Returns `None` when the flow is constant.
    fn crossing(self, v: f64, b: f64) -> Option<(f64, bool)> {
        let (rate, increasing) = match self {
            Field::Constant(a) if a != 0.0 => (a, a > 0.0),
            Field::Linear(a) if a != 0.0 && v != 0.0 => (a, (a > 0.0) == (v > 0.0)),
            _ => return None,
        };
        let t = match self {
            Field::Constant(_) => (b - v) / rate,
            Field::Linear(_) => {
                if b / v > 0.0 {
                    (b / v).ln() / rate
                } else {
                    // b lies on the far side of zero: x never reaches it and
                    // stays above it iff v is above it
                    let above = v > b;
                    match (above, increasing) {
                        (true, true) => f64::NEG_INFINITY,
                        (true, false) => f64::INFINITY,
                        (false, true) => f64::INFINITY,
                        (false, false) => f64::NEG_INFINITY,
                    }
                }
            }
        };
        Some((t, increasing))
    }

    /// `{t in R | lo < x(t) < hi}` as an interval (possibly empty).
    fn window(self, v: f64, lo: f64, hi: f64) -> (f64, f64) {
        let above = |b: f64| -> (f64, f64) {
            if b == f64::NEG_INFINITY {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            match self.crossing(v, b) {
                None => {
                    if v > b {
                        (f64::NEG_INFINITY, f64::INFINITY)
                    } else {
                        (0.0, 0.0)
                    }
                }
                Some((t, true)) => (t, f64::INFINITY),
                Some((t, false)) => (f64::NEG_INFINITY, t),
            }
        };
        let below = |b: f64| -> (f64, f64) {
            if b == f64::INFINITY {
                return (f64::NEG_INFINITY, f64::INFINITY);
            }
            match self.crossing(v, b) {
                None => {
                    if v < b {
                        (f64::NEG_INFINITY, f64::INFINITY)
                    } else {
                        (0.0, 0.0)
                    }
                }
                Some((t, true)) => (f64::NEG_INFINITY, t),
                Some((t, false)) => (t, f64::INFINITY),
            }
        };
        let (a0, a1) = above(lo);
        let (b0, b1) = below(hi);
        (a0.max(b0), a1.min(b1))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMode {
    pub name: String,
    pub fields: Vec<Field>,
    pub labels: Vec<String>,
}

/// Conjunction of open intervals `lo < x[var] < hi`; infinite ends allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticTransition {
    pub source: usize,
    pub target: usize,
    pub guard: Vec<(usize, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSystem {
    pub variables: Vec<String>,
    pub modes: Vec<AnalyticMode>,
    pub transitions: Vec<AnalyticTransition>,
    pub init: Vec<(f64, f64)>,
    pub initial_mode: usize,
}

impl AnalyticSystem {
    pub fn flow(&self, mode: usize, t: f64, v: &[f64]) -> Vec<f64> {
        self.modes[mode].fields.iter().zip(v).map(|(f, x)| f.flow(t, *x)).collect()
    }

    pub fn outgoing(&self, mode: usize) -> Vec<usize> {
        (0..self.transitions.len())
            .filter(|&i| self.transitions[i].source == mode)
            .collect()
    }

    /// The same system as a hybrid automaton, ready for the sampler.
    pub fn to_automaton(&self, horizon: usize) -> HybridAutomaton {
        let modes = self
            .modes
            .iter()
            .map(|m| Mode {
                name: m.name.clone(),
                labels: m.labels.clone(),
                constants: Vec::new(),
                rhs: m
                    .fields
                    .iter()
                    .zip(&self.variables)
                    .map(|(f, v)| match f {
                        Field::Constant(a) => Expr::Const(*a),
                        Field::Linear(a) => Expr::binary(BinaryOp::Mul, Expr::Const(*a), Expr::Var(v.clone())),
                    })
                    .collect(),
            })
            .collect();
        let transitions = self
            .transitions
            .iter()
            .map(|t| {
                let mut atoms = Vec::new();
                for &(var, lo, hi) in &t.guard {
                    if lo.is_finite() {
                        atoms.push(Guard::Lower { var, bound: lo });
                    }
                    if hi.is_finite() {
                        atoms.push(Guard::Upper { var, bound: hi });
                    }
                }
                let guard = atoms
                    .into_iter()
                    .reduce(Guard::and)
                    .expect("analytic guards need at least one finite bound");
                Transition {
                    source: t.source,
                    target: t.target,
                    guard,
                }
            })
            .collect();
        HybridAutomaton {
            name: "analytic".into(),
            variables: self.variables.clone(),
            parameters: Vec::new(),
            inputs: Vec::new(),
            modes,
            initial_mode: self.initial_mode,
            transitions,
            init: InitBox {
                intervals: self.init.clone(),
            },
            delta: 1.0,
            horizon,
        }
    }
}

pub fn measure(intervals: &[(f64, f64)]) -> f64 {
    intervals.iter().map(|(a, b)| (b - a).max(0.0)).sum()
}

/// `{t in (0, 1) | flow(mode, t, v) satisfies the guard of transition}`.
pub fn exact_time_set(sys: &AnalyticSystem, transition: usize, v: &[f64]) -> Vec<(f64, f64)> {
    let tr = &sys.transitions[transition];
    let fields = &sys.modes[tr.source].fields;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for &(var, a, b) in &tr.guard {
        let (w0, w1) = fields[var].window(v[var], a, b);
        lo = lo.max(w0);
        hi = hi.min(w1);
    }
    if lo < hi {
        vec![(lo, hi)]
    } else {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionProbs {
    /// Transition indices, in declaration order.
    pub transitions: Vec<usize>,
    pub probs: Vec<f64>,
    pub no_switch: f64,
}

/// Switch probabilities from a point: time-set measures, normalized. With
/// every measure zero the mode is kept.
pub fn exact_transition_probs(sys: &AnalyticSystem, mode: usize, v: &[f64]) -> TransitionProbs {
    let transitions = sys.outgoing(mode);
    let measures: Vec<f64> = transitions
        .iter()
        .map(|&t| measure(&exact_time_set(sys, t, v)))
        .collect();
    let total: f64 = measures.iter().sum();
    if total <= 0.0 {
        return TransitionProbs {
            probs: vec![0.0; transitions.len()],
            transitions,
            no_switch: 1.0,
        };
    }
    TransitionProbs {
        probs: measures.iter().map(|m| m / total).collect(),
        transitions,
        no_switch: 0.0,
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on the Legendre
/// recurrence).
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Quadrature resolution for [`chain_reachability`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Midpoints per dimension of the initial box.
    pub init_points: usize,
    /// Panels per switch-time interval.
    pub panels: usize,
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            init_points: 4,
            panels: 8,
            nodes: 4,
        }
    }
}

/// Probability of every mode sequence of `depth` steps under the
/// measure-proportional switching rule, integrating over the initial box and
/// the uniformly distributed switch times.
pub fn chain_reachability(sys: &AnalyticSystem, depth: usize, quad: Quadrature) -> BTreeMap<Vec<usize>, f64> {
    let gl = gauss_legendre(quad.nodes);
    let mut out = BTreeMap::new();
    let dim = sys.variables.len();
    let m = quad.init_points;
    let cells = m.pow(dim as u32);
    for cell in 0..cells {
        let mut v = Vec::with_capacity(dim);
        let mut c = cell;
        for &(lo, hi) in &sys.init {
            let k = c % m;
            c /= m;
            v.push(lo + (k as f64 + 0.5) / m as f64 * (hi - lo));
        }
        let mut path = vec![sys.initial_mode];
        descend(sys, &gl, quad.panels, &v, depth, 1.0 / cells as f64, &mut path, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn descend(
    sys: &AnalyticSystem,
    gl: &[(f64, f64)],
    panels: usize,
    v: &[f64],
    remaining: usize,
    weight: f64,
    path: &mut Vec<usize>,
    out: &mut BTreeMap<Vec<usize>, f64>,
) {
    if remaining == 0 {
        *out.entry(path.clone()).or_insert(0.0) += weight;
        return;
    }
    let mode = *path.last().unwrap();
    let outs = sys.outgoing(mode);
    let sets: Vec<Vec<(f64, f64)>> = outs.iter().map(|&t| exact_time_set(sys, t, v)).collect();
    let total: f64 = sets.iter().map(|s| measure(s)).sum();
    if total <= 0.0 {
        let next = sys.flow(mode, 1.0, v);
        path.push(mode);
        descend(sys, gl, panels, &next, remaining - 1, weight, path, out);
        path.pop();
        return;
    }
    for (&t_idx, set) in outs.iter().zip(&sets) {
        let target = sys.transitions[t_idx].target;
        path.push(target);
        for &(a, b) in set {
            let width = (b - a) / panels as f64;
            for p in 0..panels {
                let mid = a + (p as f64 + 0.5) * width;
                for &(x, w) in gl {
                    let t = mid + 0.5 * width * x;
                    // density of the switch time is 1 / total on the enabled set
                    let wt = weight * 0.5 * width * w / total;
                    let at_switch = sys.flow(mode, t, v);
                    let next = sys.flow(target, 1.0 - t, &at_switch);
                    descend(sys, gl, panels, &next, remaining - 1, wt, path, out);
                }
            }
        }
        path.pop();
    }
}

// ---------------------------------------------------------------------------
// brute-force BLTL

/// Literal evaluation at position 0, with the derived operators expanded
/// into `true U` and `!F!` first.
pub fn brute_force_bltl(f: &Formula, trace: &StateTrace) -> bool {
    eval_core(&expand(f), trace, 0)
}

/// Core syntax only: atoms, negation, disjunction, until.
#[derive(Debug, Clone)]
enum Core {
    Const(bool),
    Atom(Atom),
    Not(Box<Core>),
    Or(Box<Core>, Box<Core>),
    Until(usize, Box<Core>, Box<Core>),
}

fn expand(f: &Formula) -> Core {
    let not = |c: Core| Core::Not(Box::new(c));
    match f {
        Formula::True => Core::Const(true),
        Formula::False => Core::Const(false),
        Formula::Atom(a) => Core::Atom(a.clone()),
        Formula::Not(x) => not(expand(x)),
        Formula::Or(a, b) => Core::Or(Box::new(expand(a)), Box::new(expand(b))),
        Formula::And(a, b) => not(Core::Or(Box::new(not(expand(a))), Box::new(not(expand(b))))),
        Formula::Until(n, a, b) => Core::Until(*n, Box::new(expand(a)), Box::new(expand(b))),
        Formula::Eventually(n, x) => Core::Until(*n, Box::new(Core::Const(true)), Box::new(expand(x))),
        Formula::Always(n, x) => not(Core::Until(*n, Box::new(Core::Const(true)), Box::new(not(expand(x))))),
    }
}

fn atom_value(a: &Atom, trace: &StateTrace, j: usize) -> bool {
    match a {
        Atom::Label(l) => trace.labels[j].iter().any(|x| x == l),
        Atom::Below { var, c } | Atom::Above { var, c } => {
            let mut x = f64::NAN;
            for (name, val) in trace.variables.iter().zip(&trace.values[j]) {
                if name == var {
                    x = *val;
                }
            }
            if matches!(a, Atom::Below { .. }) {
                x < *c
            } else {
                x > *c
            }
        }
    }
}

fn eval_core(c: &Core, trace: &StateTrace, j: usize) -> bool {
    let last = trace.labels.len() - 1;
    match c {
        Core::Const(b) => *b,
        Core::Atom(a) => atom_value(a, trace, j),
        Core::Not(x) => !eval_core(x, trace, j),
        Core::Or(a, b) => eval_core(a, trace, j) || eval_core(b, trace, j),
        Core::Until(n, a, b) => {
            let mut k = 0;
            while k <= *n && j + k <= last {
                if eval_core(b, trace, j + k) {
                    let mut ok = true;
                    for i in 0..k {
                        ok &= eval_core(a, trace, j + i);
                    }
                    if ok {
                        return true;
                    }
                }
                k += 1;
            }
            false
        }
    }
}

// ---------------------------------------------------------------------------
// random corpora

/// Random formula over labels `A`, `B`, `C` and quantitative atoms on `x`
/// with constants in `{0.25, 0.5, 0.75}`, of syntax depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    const CS: [f64; 3] = [0.25, 0.5, 0.75];
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..7) {
            0 => Formula::True,
            1 => Formula::False,
            2..=4 => Formula::label(["A", "B", "C"][rng.gen_range(0..3)]),
            5 => Formula::Atom(Atom::Below {
                var: "x".into(),
                c: CS[rng.gen_range(0..3)],
            }),
            _ => Formula::Atom(Atom::Above {
                var: "x".into(),
                c: CS[rng.gen_range(0..3)],
            }),
        };
    }
    let d = depth - 1;
    let bound = rng.gen_range(1..=3);
    match rng.gen_range(0..6) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::until(bound, random_formula(rng, d), random_formula(rng, d)),
        4 => Formula::eventually(bound, random_formula(rng, d)),
        _ => Formula::always(bound, random_formula(rng, d)),
    }
}

/// Random trace of `len` positions with labels from `A`, `B`, `C` and a
/// value `x` that sometimes sits exactly on an atom constant.
pub fn random_trace(rng: &mut impl Rng, len: usize) -> StateTrace {
    let mut t = StateTrace {
        variables: vec!["x".into()],
        labels: Vec::with_capacity(len),
        values: Vec::with_capacity(len),
    };
    for _ in 0..len {
        let labels: HashSet<String> = ["A", "B", "C"]
            .iter()
            .filter(|_| rng.gen_bool(0.5))
            .map(|s| s.to_string())
            .collect();
        t.labels.push(labels);
        let x = if rng.gen_bool(0.2) {
            [0.25, 0.5, 0.75][rng.gen_range(0..3)]
        } else {
            rng.gen::<f64>()
        };
        t.values.push(vec![x]);
    }
    t
}

// ---------------------------------------------------------------------------
// fixtures

fn one_dim(modes: Vec<(&str, Field)>, transitions: Vec<(usize, usize, f64, f64)>, init: (f64, f64)) -> AnalyticSystem {
    AnalyticSystem {
        variables: vec!["x".into()],
        modes: modes
            .into_iter()
            .map(|(n, f)| AnalyticMode {
                name: n.into(),
                fields: vec![f],
                labels: vec![n.into()],
            })
            .collect(),
        transitions: transitions
            .into_iter()
            .map(|(source, target, lo, hi)| AnalyticTransition {
                source,
                target,
                guard: vec![(0, lo, hi)],
            })
            .collect(),
        init: vec![init],
        initial_mode: 0,
    }
}

/// Width of the near-point initial box used by the fixtures.
pub const POINT_WIDTH: f64 = 1e-6;

/// `dx/dt = 1` from `x ~ 0` with two guards `(lo1, hi1)` to `q1` and
/// `(lo2, hi2)` to `q2`; both targets are frozen.
pub fn two_guard_fixture(g1: (f64, f64), g2: (f64, f64)) -> AnalyticSystem {
    one_dim(
        vec![
            ("q0", Field::Constant(1.0)),
            ("q1", Field::Constant(0.0)),
            ("q2", Field::Constant(0.0)),
        ],
        vec![(0, 1, g1.0, g1.1), (0, 2, g2.0, g2.1)],
        (0.0, POINT_WIDTH),
    )
}

/// Four-mode system with several distinct three-step mode sequences.
pub fn depth_three_fixture() -> AnalyticSystem {
    one_dim(
        vec![
            ("q0", Field::Constant(1.0)),
            ("q1", Field::Constant(2.0)),
            ("q2", Field::Constant(0.0)),
            ("q3", Field::Constant(1.0)),
        ],
        vec![
            (0, 1, 0.0, 0.5),
            (0, 2, 0.5, 100.0),
            (1, 3, 1.0, 3.0),
            (1, 2, 3.0, 100.0),
            (2, 3, 0.0, 0.75),
            (2, 0, 0.75, 100.0),
        ],
        (0.0, POINT_WIDTH),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bltl::{check, to_nnf};
    use crate::flow::{CompiledSystem, FlowConfig};
    use crate::model::guard_sat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single(field: Field, lo: f64, hi: f64) -> AnalyticSystem {
        one_dim(
            vec![("q0", field), ("q1", Field::Constant(0.0))],
            vec![(0, 1, lo, hi)],
            (0.0, 1.0),
        )
    }

    fn close(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12)
    }

    #[test]
    fn time_sets_by_hand() {
        let s = single(Field::Constant(1.0), 0.5, 1.5);
        assert!(close(&exact_time_set(&s, 0, &[0.0]), &[(0.5, 1.0)]));
        let s = single(Field::Constant(1.0), 5.0, 6.0);
        assert!(exact_time_set(&s, 0, &[0.0]).is_empty());
        let e = std::f64::consts::E;
        let s = single(Field::Linear(1.0), e.powf(0.25), e.powf(0.75));
        assert!(close(&exact_time_set(&s, 0, &[1.0]), &[(0.25, 0.75)]));
        // decreasing flows and bounds on the far side of zero
        let s = single(Field::Linear(-1.0), -1.0, (-0.5f64).exp());
        assert!(close(&exact_time_set(&s, 0, &[1.0]), &[(0.5, 1.0)]));
        let s = single(Field::Linear(1.0), 0.0, 10.0);
        assert!(exact_time_set(&s, 0, &[-1.0]).is_empty());
        let s = single(Field::Constant(0.0), 0.0, 10.0);
        assert!(close(&exact_time_set(&s, 0, &[1.0]), &[(0.0, 1.0)]));
    }

    #[test]
    fn time_sets_match_dense_scan() {
        let cases = [
            (Field::Constant(1.0), 0.3, 0.9, 0.0),
            (Field::Constant(-2.0), -1.0, 0.5, 0.7),
            (Field::Linear(1.0), 1.2, 2.0, 1.0),
            (Field::Linear(-0.7), 0.3, 0.8, 1.0),
            (Field::Linear(2.0), -3.0, -1.5, -1.0),
            (Field::Constant(0.0), 0.0, 1.0, 0.5),
        ];
        for (field, lo, hi, v) in cases {
            let sys = single(field, lo, hi);
            let h = sys.to_automaton(1);
            let compiled = CompiledSystem::new(&h).unwrap();
            let exact = exact_time_set(&sys, 0, &[v]);
            let n = 10_000;
            let mut diff = 0usize;
            for i in 0..n {
                let t = (i as f64 + 0.5) / n as f64;
                let x = compiled.flow(0, t, &[v], 0.0, FlowConfig::default()).unwrap();
                let numeric = guard_sat(&h.transitions[0].guard, &x);
                let analytic = exact.iter().any(|(a, b)| *a < t && t < *b);
                diff += (numeric != analytic) as usize;
            }
            assert!((diff as f64 / n as f64) < 1e-3, "{field:?} {lo} {hi} {v}: {diff}");
        }
    }

    #[test]
    fn transition_probs() {
        let sym = two_guard_fixture((0.0, 0.4), (0.6, 1.0));
        let p = exact_transition_probs(&sym, 0, &[0.0]);
        assert!((p.probs[0] - 0.5).abs() < 1e-12 && (p.probs[1] - 0.5).abs() < 1e-12);
        let lopsided = two_guard_fixture((0.0, 0.1), (0.5, 0.8));
        let p = exact_transition_probs(&lopsided, 0, &[0.0]);
        assert!((p.probs[0] - 0.25).abs() < 1e-12 && (p.probs[1] - 0.75).abs() < 1e-12);
        let one = single(Field::Constant(1.0), 0.0, 0.3);
        assert_eq!(exact_transition_probs(&one, 0, &[0.0]).probs, vec![1.0]);
        let none = single(Field::Constant(1.0), 5.0, 6.0);
        let p = exact_transition_probs(&none, 0, &[0.0]);
        assert_eq!((p.probs[0], p.no_switch), (0.0, 1.0));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(4);
        let s: f64 = gl.iter().map(|(x, w)| w * x.powi(6)).sum();
        assert!((s - 2.0 / 7.0).abs() < 1e-13);
        let s: f64 = gl.iter().map(|(_, w)| w).sum();
        assert!((s - 2.0).abs() < 1e-13);
    }

    #[test]
    fn chain_distributions() {
        let det = single(Field::Constant(1.0), 0.0, 2.0);
        let d = chain_reachability(&det, 1, Quadrature::default());
        assert_eq!(d.len(), 1);
        assert!((d[&vec![0, 1]] - 1.0).abs() < 1e-12);

        let sym = two_guard_fixture((0.0, 0.4), (0.6, 1.0));
        let d = chain_reachability(&sym, 1, Quadrature::default());
        assert!((d[&vec![0, 1]] - 0.5).abs() < 1e-5);
        assert!((d[&vec![0, 2]] - 0.5).abs() < 1e-5);

        // hand-derived path probabilities of the depth-three fixture
        let d = chain_reachability(&depth_three_fixture(), 3, Quadrature::default());
        let expect = [
            (vec![0, 1, 3, 3], 0.3125),
            (vec![0, 1, 2, 0], 0.1875),
            (vec![0, 2, 3, 3], 0.25),
            (vec![0, 2, 0, 2], 0.25),
        ];
        assert_eq!(d.len(), expect.len());
        for (path, p) in expect {
            assert!((d[&path] - p).abs() < 1e-4, "{path:?}: {}", d[&path]);
        }
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brute_force_examples() {
        let t = StateTrace::from_labels(vec![vec![], vec!["A"]]);
        assert!(brute_force_bltl(&Formula::eventually(1, Formula::label("A")), &t));
        let t = StateTrace::from_labels(vec![vec!["A"], vec!["A"], vec!["B"]]);
        assert!(brute_force_bltl(&Formula::until(2, Formula::label("A"), Formula::label("B")), &t));
    }

    #[test]
    fn brute_force_agrees_with_checker() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..2000 {
            let f = random_formula(&mut rng, 3);
            let len = crate::bltl::horizon(&f) + 1 + rng.gen_range(0..3);
            let t = random_trace(&mut rng, len.min(8).max(crate::bltl::horizon(&f) + 1));
            let b = brute_force_bltl(&f, &t);
            assert_eq!(check(&f, &t, 0).unwrap(), b, "{f}");
            assert_eq!(check(&to_nnf(&f), &t, 0).unwrap(), b, "{f}");
        }
    }
}

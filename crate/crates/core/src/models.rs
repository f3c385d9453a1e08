//! Builtin case studies: a four-mode cardiac action-potential model, a
//! sixteen-mode circadian clock, and the property table checked against them.
//!
//! Builtins are addressable by query strings such as
//! `builtin:cardiac?cell=epi&cond=healthy&stim=transient&tau_s2=2` or
//! `builtin:circadian?variant=cry-mutant`. Keys other than the scenario
//! selectors override model parameters by name.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::bltl::{parse_bltl, scale_bounds, BltlError, Formula};
use crate::model::{parse_model, HybridAutomaton, ModelError};

#[derive(Debug, Error)]
pub enum BuiltinError {
    #[error("unknown builtin `{0}` (expected cardiac or circadian)")]
    UnknownModel(String),
    #[error("bad value `{value}` for `{key}`; expected one of {expected}")]
    BadChoice {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("malformed query item `{0}`")]
    Query(String),
    #[error("override `{key}`: {msg}")]
    Override { key: String, msg: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ---------------------------------------------------------------------------
// cardiac

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cell {
    Epi,
    Endo,
    Mid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Healthy,
    Diseased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stimulus {
    Transient,
    Sustained,
}

impl Cell {
    pub fn name(self) -> &'static str {
        match self {
            Cell::Epi => "epi",
            Cell::Endo => "endo",
            Cell::Mid => "mid",
        }
    }
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Healthy => "healthy",
            Condition::Diseased => "diseased",
        }
    }
}

impl Stimulus {
    pub fn name(self) -> &'static str {
        match self {
            Stimulus::Transient => "transient",
            Stimulus::Sustained => "sustained",
        }
    }

    /// Duration of the unit stimulus current in milliseconds.
    pub fn duration(self) -> f64 {
        match self {
            Stimulus::Transient => 1.0,
            Stimulus::Sustained => 500.0,
        }
    }
}

/// Value of the fast-gate time constant `tau_o1` under the diseased condition.
pub const DISEASED_TAU_O1: f64 = 0.004;

pub const CARDIAC_DELTA: f64 = 0.1;
pub const CARDIAC_HORIZON: usize = 20000;

const CARDIAC_SHARED: [(&str, f64); 7] = [
    ("theta_o", 0.006),
    ("theta_w", 0.13),
    ("theta_v", 0.3),
    ("u_s", 0.9087),
    ("k_s", 2.994),
    ("tau_v_plus", 1.4506),
    ("tau_s1", 2.7342),
];

const CARDIAC_NAMES: [&str; 19] = [
    "u_w", "u_so", "u_u", "w_inf_star", "k_w", "k_so", "tau_w_plus", "tau_v1", "tau_v2", "tau_w1", "tau_w2", "tau_o1",
    "tau_o2", "tau_so1", "tau_so2", "tau_s2", "tau_fi", "tau_si", "tau_winf",
];

fn cell_values(cell: Cell) -> [f64; 19] {
    match cell {
        Cell::Epi => [
            0.03, 0.65, 1.55, 0.94, 65.0, 2.0458, 200.0, 60.0, 1150.0, 60.0, 15.0, 400.0, 6.0, 30.0181, 0.9957, 16.0,
            0.11, 1.8875, 0.07,
        ],
        Cell::Endo => [
            0.016, 0.65, 1.56, 0.78, 200.0, 2.0, 280.0, 75.0, 10.0, 6.0, 140.0, 470.0, 6.0, 40.0, 1.2, 2.0, 0.1,
            2.9013, 0.0273,
        ],
        Cell::Mid => [
            0.016, 0.6, 1.61, 0.5, 200.0, 2.1, 280.0, 80.0, 1.4506, 70.0, 8.0, 410.0, 7.0, 91.0, 0.8, 4.0, 0.078,
            3.3849, 0.01,
        ],
    }
}

/// The cardiac automaton for one cell type, condition and stimulus.
pub fn cardiac_model(cell: Cell, condition: Condition, stimulus: Stimulus) -> HybridAutomaton {
    let mut params: Vec<(&str, f64)> = CARDIAC_SHARED.to_vec();
    params.extend(CARDIAC_NAMES.iter().copied().zip(cell_values(cell)));
    if condition == Condition::Diseased {
        for p in params.iter_mut().filter(|p| p.0 == "tau_o1") {
            p.1 = DISEASED_TAU_O1;
        }
    }

    let mut doc = String::new();
    let _ = writeln!(doc, "name cardiac-{}-{}-{}", cell.name(), condition.name(), stimulus.name());
    let _ = writeln!(doc, "delta {CARDIAC_DELTA}\nhorizon {CARDIAC_HORIZON}");
    doc.push_str("[variables]\nu v w s\n[parameters]\n");
    for (p, v) in &params {
        let _ = writeln!(doc, "{p} = {v}");
    }
    let _ = writeln!(doc, "[inputs]\nstim = 0: 1; {}: 0", stimulus.duration());
    doc.push_str("[init]\ndistribution = uniform\nu = (0, 0.001)\nv = (0.999, 1)\nw = (0.999, 1)\ns = (0, 0.001)\n");

    let s_inf = "(1 + tanh(k_s * (u - u_s))) / 2";
    let tau_w_minus = "(tau_w1 + (tau_w2 - tau_w1) * (1 + tanh(k_w * (u - u_w))) / 2)";
    let tau_so = "(tau_so1 + (tau_so2 - tau_so1) * (1 + tanh(k_so * (u - u_so))) / 2)";
    let modes: [(&str, Option<&str>, [String; 4]); 4] = [
        (
            "q0",
            Some("Resting mode"),
            [
                "stim - u / tau_o1".into(),
                "(1 - v) / tau_v1".into(),
                format!("(1 - u / tau_winf - w) / {tau_w_minus}"),
                format!("({s_inf} - s) / tau_s1"),
            ],
        ),
        (
            "q1",
            None,
            [
                "stim - u / tau_o2".into(),
                "-v / tau_v2".into(),
                format!("(w_inf_star - w) / {tau_w_minus}"),
                format!("({s_inf} - s) / tau_s1"),
            ],
        ),
        (
            "q2",
            None,
            [
                format!("stim - 1 / {tau_so} + w * s / tau_si"),
                "-v / tau_v2".into(),
                "-w / tau_w_plus".into(),
                format!("({s_inf} - s) / tau_s2"),
            ],
        ),
        (
            "q3",
            Some("AP mode"),
            [
                format!("stim - 1 / {tau_so} + w * s / tau_si + v * (u - theta_v) * (u_u - u) / tau_fi"),
                "-v / tau_v_plus".into(),
                "-w / tau_w_plus".into(),
                format!("({s_inf} - s) / tau_s2"),
            ],
        ),
    ];
    doc.push_str("[modes]\ninitial = q0\n");
    for (name, label, rhs) in &modes {
        let _ = writeln!(doc, "mode {name}");
        if let Some(l) = label {
            let _ = writeln!(doc, "  label \"{l}\"");
        }
        for (var, e) in ["u", "v", "w", "s"].iter().zip(rhs) {
            let _ = writeln!(doc, "  ode {var} = {e}");
        }
    }
    doc.push_str(
        "[transitions]\n\
         q0 -> q1 : 0.006 < u\n\
         q1 -> q0 : u < 0.006\n\
         q1 -> q2 : 0.13 < u\n\
         q2 -> q1 : u < 0.13\n\
         q2 -> q3 : 0.3 < u\n\
         q3 -> q2 : u < 0.3\n",
    );
    parse_model(&doc).expect("builtin cardiac document is well formed")
}

// ---------------------------------------------------------------------------
// circadian

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircadianVariant {
    Wild,
    CryMutant,
    RevErbMutant,
    /// Bmal transcription no longer depends on the PER-CRY band.
    NoPerCry,
}

impl CircadianVariant {
    pub fn name(self) -> &'static str {
        match self {
            CircadianVariant::Wild => "wild",
            CircadianVariant::CryMutant => "cry-mutant",
            CircadianVariant::RevErbMutant => "rev-erb-mutant",
            CircadianVariant::NoPerCry => "no-percry",
        }
    }
}

pub const CIRCADIAN_DELTA: f64 = 0.1;
pub const CIRCADIAN_HORIZON: usize = 30000;

/// Clock mRNA drive: a square wave that starts high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockDrive {
    pub period: f64,
    pub high: f64,
    pub low: f64,
}

impl Default for ClockDrive {
    fn default() -> Self {
        ClockDrive {
            period: 1440.0,
            high: 1.0,
            low: 0.5,
        }
    }
}

/// Rate constants `k1..k28` (`k8` and `k23` do not occur in the equations).
pub const CIRCADIAN_RATES: [(&str, f64); 26] = [
    ("k1", 0.02),
    ("k2", 0.02),
    ("k3", 0.02),
    ("k4", 0.02),
    ("k5", 0.02),
    ("k6", 0.05),
    ("k7", 0.05),
    ("k9", 0.02),
    ("k10", 0.03),
    ("k11", 0.02),
    ("k12", 0.005),
    ("k13", 0.16),
    ("k14", 0.002),
    ("k15", 0.1),
    ("k16", 0.01),
    ("k17", 0.16),
    ("k18", 0.002),
    ("k19", 0.1),
    ("k20", 1.0),
    ("k21", 0.001),
    ("k22", 0.05),
    ("k24", 0.05),
    ("k25", 0.02),
    ("k26", 0.09),
    ("k27", 0.006),
    ("k28", 0.1),
];

pub const CIRCADIAN_VARIABLES: [&str; 11] = [
    "Per", "PER", "Cry", "CRY", "PER_CRY", "Rev_Erb", "REV_ERB", "CLOCK", "Bmal", "BMAL", "CLOCK_BMAL",
];

const INDICATORS: [&str; 5] = ["ind_pc1", "ind_pc2", "ind_pc3", "ind_re", "ind_cb"];

/// PER-CRY thresholds separating the four bands.
const PER_CRY_THRESHOLDS: [f64; 3] = [1.4, 1.5, 2.2];
const REV_ERB_THRESHOLD: f64 = 1.1;
const CLOCK_BMAL_THRESHOLD: f64 = 1.0;

/// Indicator values `(pc1, pc2, pc3, re, cb)` of circadian mode `m1..m16`
/// (zero-based `index`).
pub fn circadian_indicators(index: usize) -> [u8; 5] {
    let band = index / 4;
    let re = 1 - (index / 2) % 2;
    let cb = index % 2;
    let pcs = match band {
        0 => [1, 1, 0],
        1 => [0, 1, 0],
        2 => [0, 0, 0],
        _ => [0, 0, 1],
    };
    [pcs[0], pcs[1], pcs[2], re as u8, cb as u8]
}

fn circadian_index(band: usize, re: usize, cb: usize) -> usize {
    band * 4 + (1 - re) * 2 + cb
}

pub fn circadian_model(variant: CircadianVariant) -> HybridAutomaton {
    circadian_model_with(variant, ClockDrive::default())
}

pub fn circadian_model_with(variant: CircadianVariant, clock: ClockDrive) -> HybridAutomaton {
    let mut doc = String::new();
    let _ = writeln!(doc, "name circadian-{}", variant.name());
    let _ = writeln!(doc, "delta {CIRCADIAN_DELTA}\nhorizon {CIRCADIAN_HORIZON}");
    let _ = writeln!(doc, "[variables]\n{}", CIRCADIAN_VARIABLES.join(" "));
    doc.push_str("[parameters]\n");
    for (k, v) in CIRCADIAN_RATES {
        let zeroed = match variant {
            CircadianVariant::CryMutant => matches!(k, "k17" | "k18"),
            CircadianVariant::RevErbMutant => matches!(k, "k20" | "k21"),
            _ => false,
        };
        let _ = writeln!(doc, "{k} = {}", if zeroed { 0.0 } else { v });
    }
    // indicator coefficients, set per mode
    for name in INDICATORS {
        let _ = writeln!(doc, "{name} = 0");
    }

    // breakpoints well past the horizon so longer runs keep oscillating
    let until = 2.0 * CIRCADIAN_HORIZON as f64 * CIRCADIAN_DELTA;
    let wave = crate::model::InputSignal::square_wave("Clock", clock.period, clock.high, clock.low, until);
    let bps: Vec<String> = wave.breakpoints.iter().map(|(t, v)| format!("{t}: {v}")).collect();
    let _ = writeln!(doc, "[inputs]\nClock = {}", bps.join("; "));

    doc.push_str("[init]\ndistribution = uniform\n");
    for v in CIRCADIAN_VARIABLES {
        let _ = writeln!(doc, "{v} = (0.5, 0.6)");
    }

    let bmal_drive = if variant == CircadianVariant::NoPerCry {
        "k26 * ind_re"
    } else {
        "k26 * ind_pc3 * ind_re"
    };
    let rhs = [
        "-k1 * Per + k13 * ind_pc2 * ind_cb + k14".to_string(),
        "-k2 * PER + k15 * Per - k16 * PER * CRY".into(),
        "-k3 * Cry + k17 * ind_pc2 * ind_cb + k18".into(),
        "-k4 * CRY + k19 * Cry - k16 * PER * CRY".into(),
        "-k5 * PER_CRY + k16 * PER * CRY".into(),
        "-k6 * Rev_Erb + k20 * ind_pc1 * ind_cb + k21".into(),
        "-k7 * REV_ERB + k22 * Rev_Erb".into(),
        "-k9 * CLOCK + k24 * Clock - k25 * CLOCK * BMAL".into(),
        format!("-k10 * Bmal + {bmal_drive} + k27"),
        "-k11 * BMAL + k28 * Bmal - k25 * CLOCK * BMAL".into(),
        "-k12 * CLOCK_BMAL + k25 * CLOCK * BMAL".into(),
    ];
    doc.push_str("[modes]\ninitial = m1\n");
    for m in 0..16 {
        let ind = circadian_indicators(m);
        let _ = writeln!(doc, "mode m{}", m + 1);
        for (name, val) in INDICATORS.iter().zip(ind) {
            let _ = writeln!(doc, "  let {name} = {val}");
        }
        for (var, e) in CIRCADIAN_VARIABLES.iter().zip(&rhs) {
            let _ = writeln!(doc, "  ode {var} = {e}");
        }
    }

    doc.push_str("[transitions]\n");
    for band in 0..4 {
        for re in [1, 0] {
            for cb in [0, 1] {
                let from = circadian_index(band, re, cb) + 1;
                let mut edge = |to: usize, guard: String| {
                    let _ = writeln!(doc, "m{from} -> m{} : {guard}", to + 1);
                };
                if band < 3 {
                    let c = PER_CRY_THRESHOLDS[band];
                    edge(circadian_index(band + 1, re, cb), format!("{c} < PER_CRY"));
                }
                if band > 0 {
                    let c = PER_CRY_THRESHOLDS[band - 1];
                    edge(circadian_index(band - 1, re, cb), format!("PER_CRY < {c}"));
                }
                let flip_re = if re == 1 {
                    format!("{REV_ERB_THRESHOLD} < REV_ERB")
                } else {
                    format!("REV_ERB < {REV_ERB_THRESHOLD}")
                };
                edge(circadian_index(band, 1 - re, cb), flip_re);
                let flip_cb = if cb == 0 {
                    format!("{CLOCK_BMAL_THRESHOLD} < CLOCK_BMAL")
                } else {
                    format!("CLOCK_BMAL < {CLOCK_BMAL_THRESHOLD}")
                };
                edge(circadian_index(band, re, 1 - cb), flip_cb);
            }
        }
    }
    parse_model(&doc).expect("builtin circadian document is well formed")
}

// ---------------------------------------------------------------------------
// builtin queries

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Cardiac {
        cell: Cell,
        condition: Condition,
        stimulus: Stimulus,
        overrides: Vec<(String, f64)>,
    },
    Circadian {
        variant: CircadianVariant,
        clock: ClockDrive,
        overrides: Vec<(String, f64)>,
    },
}

impl Scenario {
    pub fn build(&self) -> Result<HybridAutomaton, BuiltinError> {
        let (mut h, overrides) = match self {
            Scenario::Cardiac {
                cell,
                condition,
                stimulus,
                overrides,
            } => (cardiac_model(*cell, *condition, *stimulus), overrides),
            Scenario::Circadian {
                variant,
                clock,
                overrides,
            } => (circadian_model_with(*variant, *clock), overrides),
        };
        for (k, v) in overrides {
            h.set_parameter(k, *v).map_err(|e| BuiltinError::Override {
                key: k.clone(),
                msg: e.to_string(),
            })?;
        }
        Ok(h)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let overrides = match self {
            Scenario::Cardiac {
                cell,
                condition,
                stimulus,
                overrides,
            } => {
                write!(
                    f,
                    "builtin:cardiac?cell={}&cond={}&stim={}",
                    cell.name(),
                    condition.name(),
                    stimulus.name()
                )?;
                overrides
            }
            Scenario::Circadian {
                variant,
                clock,
                overrides,
            } => {
                write!(f, "builtin:circadian?variant={}", variant.name())?;
                let d = ClockDrive::default();
                if clock.period != d.period {
                    write!(f, "&clock_period={}", clock.period)?;
                }
                if clock.high != d.high {
                    write!(f, "&clock_high={}", clock.high)?;
                }
                if clock.low != d.low {
                    write!(f, "&clock_low={}", clock.low)?;
                }
                overrides
            }
        };
        for (k, v) in overrides {
            write!(f, "&{k}={v}")?;
        }
        Ok(())
    }
}

fn choice<T: Copy>(key: &str, value: &str, options: &[(&str, T)], expected: &'static str) -> Result<T, BuiltinError> {
    options
        .iter()
        .find(|(n, _)| n.eq_ignore_ascii_case(value))
        .map(|(_, t)| *t)
        .ok_or_else(|| BuiltinError::BadChoice {
            key: key.into(),
            value: value.into(),
            expected,
        })
}

fn number(key: &str, value: &str) -> Result<f64, BuiltinError> {
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(BuiltinError::Override {
            key: key.into(),
            msg: format!("`{value}` is not a finite number"),
        }),
    }
}

/// Parses `builtin:NAME?key=value&...`. The `builtin:` prefix is optional.
pub fn parse_builtin(spec: &str) -> Result<Scenario, BuiltinError> {
    let spec = spec.strip_prefix("builtin:").unwrap_or(spec);
    let (name, query) = spec.split_once('?').unwrap_or((spec, ""));
    let mut items = Vec::new();
    for item in query.split('&').filter(|s| !s.is_empty()) {
        let (k, v) = item.split_once('=').ok_or_else(|| BuiltinError::Query(item.into()))?;
        items.push((k.trim(), v.trim()));
    }
    match name {
        "cardiac" => {
            let mut cell = Cell::Epi;
            let mut condition = Condition::Healthy;
            let mut stimulus = Stimulus::Transient;
            let mut overrides = Vec::new();
            for (k, v) in items {
                match k {
                    "cell" => {
                        cell = choice(
                            k,
                            v,
                            &[("epi", Cell::Epi), ("endo", Cell::Endo), ("mid", Cell::Mid)],
                            "epi, endo, mid",
                        )?
                    }
                    "cond" => {
                        condition = choice(
                            k,
                            v,
                            &[("healthy", Condition::Healthy), ("diseased", Condition::Diseased)],
                            "healthy, diseased",
                        )?
                    }
                    "stim" => {
                        stimulus = choice(
                            k,
                            v,
                            &[("transient", Stimulus::Transient), ("sustained", Stimulus::Sustained)],
                            "transient, sustained",
                        )?
                    }
                    _ => overrides.push((k.to_string(), number(k, v)?)),
                }
            }
            Ok(Scenario::Cardiac {
                cell,
                condition,
                stimulus,
                overrides,
            })
        }
        "circadian" => {
            let mut variant = CircadianVariant::Wild;
            let mut clock = ClockDrive::default();
            let mut overrides = Vec::new();
            for (k, v) in items {
                match k {
                    "variant" => {
                        variant = choice(
                            k,
                            v,
                            &[
                                ("wild", CircadianVariant::Wild),
                                ("cry-mutant", CircadianVariant::CryMutant),
                                ("rev-erb-mutant", CircadianVariant::RevErbMutant),
                                ("no-percry", CircadianVariant::NoPerCry),
                            ],
                            "wild, cry-mutant, rev-erb-mutant, no-percry",
                        )?
                    }
                    "clock_period" => clock.period = number(k, v)?,
                    "clock_high" => clock.high = number(k, v)?,
                    "clock_low" => clock.low = number(k, v)?,
                    _ => overrides.push((k.to_string(), number(k, v)?)),
                }
            }
            if clock.period <= 0.0 {
                return Err(BuiltinError::Override {
                    key: "clock_period".into(),
                    msg: "must be positive".into(),
                });
            }
            Ok(Scenario::Circadian {
                variant,
                clock,
                overrides,
            })
        }
        other => Err(BuiltinError::UnknownModel(other.into())),
    }
}

/// Parses and builds a builtin model in one go.
pub fn builtin_model(spec: &str) -> Result<HybridAutomaton, BuiltinError> {
    parse_builtin(spec)?.build()
}

// ---------------------------------------------------------------------------
// property table

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Cardiac,
    Circadian,
}

/// One row of the reference result table.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub property: &'static str,
    pub study: Study,
    pub condition: &'static str,
    pub scenario: String,
    /// Formula with bounds in model time units.
    pub formula: &'static str,
    pub expected_holds: bool,
    pub expected_samples: usize,
}

impl PropertyRow {
    /// The formula with its bounds converted from time units to steps of `h`.
    pub fn step_formula(&self, h: &HybridAutomaton) -> Result<Formula, BltlError> {
        let f = parse_bltl(self.formula, &h.labels())?;
        scale_bounds(&f, 1.0 / h.delta)
    }
}

pub const C1: &str = "F<=500(![Resting mode])";
pub const C2: &str = "F<=500([AP mode]) & F<=500(G<=100([Resting mode]))";
pub const C3: &str = "F<=500(G<=1([1.4 <= u]) & F<=500([0.8 <= u] & [u <= 1.1] & F<=500(G<=50([1.1 <= u]))))";
pub const R1: &str = "F<=500([1.5 <= Bmal] & F<=500([Bmal <= 0.8] & F<=500([1.5 <= Bmal] & \
                      F<=500([Bmal <= 0.8] & F<=500([1.5 <= Bmal])))))";
pub const R2: &str = "F<=500([Bmal <= 0.8] & [2.0 <= Per] & [2.0 <= Cry] & \
                      F<=500([1.5 <= Bmal] & [Per <= 0.8] & [Cry <= 0.8] & \
                      F<=500([Bmal <= 0.8] & [2.0 <= Per] & [2.0 <= Cry] & \
                      F<=500([1.5 <= Bmal] & [Per <= 0.8] & [Cry <= 0.8]))))";

/// All 22 reference rows, in table order.
pub fn property_suite() -> Vec<PropertyRow> {
    let cardiac = |property, formula, condition, cell: &str, query: &str, holds: bool| PropertyRow {
        property,
        study: Study::Cardiac,
        condition,
        scenario: format!("builtin:cardiac?cell={cell}&{query}"),
        formula,
        expected_holds: holds,
        expected_samples: if holds { 459 } else { 1 },
    };
    let circadian = |property, formula, condition, variant: &str, holds: bool| PropertyRow {
        property,
        study: Study::Circadian,
        condition,
        scenario: format!("builtin:circadian?variant={variant}"),
        formula,
        expected_holds: holds,
        expected_samples: if holds { 459 } else { 1 },
    };
    let healthy = "cond=healthy&stim=transient";
    let diseased = "cond=diseased&stim=transient";
    let sustained = "cond=healthy&stim=sustained";
    vec![
        cardiac("C1", C1, "Epicardial, Healthy", "epi", healthy, true),
        cardiac("C1", C1, "Endocardial, Healthy", "endo", healthy, true),
        cardiac("C1", C1, "Midmyocardial, Healthy", "mid", healthy, true),
        cardiac("C1", C1, "Epicardial, Diseased", "epi", diseased, false),
        cardiac("C1", C1, "Endocardial, Diseased", "endo", diseased, false),
        cardiac("C1", C1, "Midmyocardial, Diseased", "mid", diseased, false),
        cardiac("C2", C2, "Epicardial, Transient", "epi", healthy, true),
        cardiac("C2", C2, "Endocardial, Transient", "endo", healthy, true),
        cardiac("C2", C2, "Midmyocardial, Transient", "mid", healthy, true),
        cardiac("C2", C2, "Epicardial, Sustained", "epi", sustained, false),
        cardiac("C2", C2, "Endocardial, Sustained", "endo", sustained, false),
        cardiac("C2", C2, "Midmyocardial, Sustained", "mid", sustained, false),
        cardiac("C3", C3, "Epicardial, tau_s2=16", "epi", healthy, true),
        cardiac("C3", C3, "Epicardial, tau_s2=2", "epi", "cond=healthy&stim=transient&tau_s2=2", false),
        cardiac("C3", C3, "Endocardial", "endo", healthy, false),
        cardiac("C3", C3, "Midmyocardial", "mid", healthy, false),
        circadian("R1", R1, "Wild type", "wild", true),
        circadian("R1", R1, "Cry mutant", "cry-mutant", false),
        circadian("R1", R1, "Rev-Erb mutant", "rev-erb-mutant", true),
        circadian("R2", R2, "Wild type", "wild", true),
        circadian("R2", R2, "Without PER-CRY dependence", "no-percry", false),
        circadian("R1", R1, "Without PER-CRY dependence", "no-percry", true),
    ]
}

//! Hybrid automata: modes with ODE right-hand sides, guarded transitions,
//! a uniform initial box, labels and piecewise-constant inputs.
//!
//! Text format (one item per line, `#` starts a comment):
//!
//! ```text
//! name toy
//! delta 1
//! horizon 10
//!
//! [variables]
//! x
//!
//! [parameters]
//! rate = 1
//!
//! [inputs]
//! stim = 0: 1; 1: 0
//!
//! [init]
//! distribution = uniform
//! x = (0, 0.1)
//!
//! [modes]
//! initial = q0
//! mode q0
//!   label "Resting mode"
//!   let rate = 2
//!   ode x = rate + stim
//! mode q1
//!   ode x = 0
//!
//! [transitions]
//! q0 -> q1 : 0 < x && x < 2
//! ```
//!
//! `let` overrides a declared parameter inside one mode. Guards only admit
//! strict atoms `NUM < NAME` and `NAME < NUM` combined with `&&`, `||` and
//! parentheses; `&&` binds tighter than `||`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::expr::{parse_expr, Expr, ExprError, SymbolKind, SymbolTable};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Schema { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Expr { line: usize, source: ExprError },
    #[error("undeclared symbol `{0}`")]
    Undeclared(String),
    #[error("model has no modes")]
    NoModes,
    #[error("init interval for `{var}` is not an open interval: ({lo}, {hi})")]
    BadInit { var: String, lo: f64, hi: f64 },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("input `{name}` queried at time {t} outside its schedule")]
    InputRange { name: String, t: f64 },
}

fn schema<T>(line: usize, msg: impl Into<String>) -> Result<T, ModelError> {
    Err(ModelError::Schema { line, msg: msg.into() })
}

// ---------------------------------------------------------------------------
// guards

#[derive(Debug, Clone, PartialEq)]
pub enum Guard {
    /// `bound < x[var]`
    Lower { var: usize, bound: f64 },
    /// `x[var] < bound`
    Upper { var: usize, bound: f64 },
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn and(a: Guard, b: Guard) -> Guard {
        Guard::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Guard {
        Guard::Or(Box::new(a), Box::new(b))
    }

    /// Open interval `lo < x[var] < hi`.
    pub fn between(var: usize, lo: f64, hi: f64) -> Guard {
        Guard::and(Guard::Lower { var, bound: lo }, Guard::Upper { var, bound: hi })
    }

    pub fn max_var(&self) -> usize {
        match self {
            Guard::Lower { var, .. } | Guard::Upper { var, .. } => *var,
            Guard::And(a, b) | Guard::Or(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> GuardDisplay<'a> {
        GuardDisplay { guard: self, names }
    }

    /// Every threshold constant, per variable.
    pub fn constants(&self, out: &mut Vec<(usize, f64)>) {
        match self {
            Guard::Lower { var, bound } | Guard::Upper { var, bound } => out.push((*var, *bound)),
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.constants(out);
                b.constants(out);
            }
        }
    }
}

/// Strict structural evaluation of a guard at a value state.
#[inline]
pub fn guard_sat(g: &Guard, v: &[f64]) -> bool {
    match g {
        Guard::Lower { var, bound } => *bound < v[*var],
        Guard::Upper { var, bound } => v[*var] < *bound,
        Guard::And(a, b) => guard_sat(a, v) && guard_sat(b, v),
        Guard::Or(a, b) => guard_sat(a, v) || guard_sat(b, v),
    }
}

pub struct GuardDisplay<'a> {
    guard: &'a Guard,
    names: &'a [String],
}

impl GuardDisplay<'_> {
    fn write(&self, f: &mut fmt::Formatter<'_>, g: &Guard) -> fmt::Result {
        match g {
            Guard::Lower { var, bound } => write!(f, "{bound} < {}", self.names[*var]),
            Guard::Upper { var, bound } => write!(f, "{} < {bound}", self.names[*var]),
            Guard::And(a, b) => {
                self.operand(f, a, matches!(**a, Guard::Or(..)))?;
                f.write_str(" && ")?;
                self.operand(f, b, matches!(**b, Guard::Or(..) | Guard::And(..)))
            }
            Guard::Or(a, b) => {
                self.write(f, a)?;
                f.write_str(" || ")?;
                self.operand(f, b, matches!(**b, Guard::Or(..)))
            }
        }
    }

    fn operand(&self, f: &mut fmt::Formatter<'_>, g: &Guard, paren: bool) -> fmt::Result {
        if paren {
            f.write_str("(")?;
            self.write(f, g)?;
            f.write_str(")")
        } else {
            self.write(f, g)
        }
    }
}

impl fmt::Display for GuardDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, self.guard)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum GTok {
    Num(f64),
    Name(String),
    Lt,
    And,
    Or,
    Open,
    Close,
}

fn guard_tokens(text: &str) -> Result<Vec<GTok>, String> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '<' => {
                if b.get(i + 1) == Some(&b'=') {
                    return Err("guards only admit strict `<`".into());
                }
                out.push(GTok::Lt);
                i += 1;
            }
            '(' => {
                out.push(GTok::Open);
                i += 1;
            }
            ')' => {
                out.push(GTok::Close);
                i += 1;
            }
            '&' if b.get(i + 1) == Some(&b'&') => {
                out.push(GTok::And);
                i += 2;
            }
            '|' if b.get(i + 1) == Some(&b'|') => {
                out.push(GTok::Or);
                i += 2;
            }
            _ if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let start = i;
                i += 1;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'.' || b[i] == b'-' || b[i] == b'+')
                {
                    // stop a sign that is not part of an exponent
                    if (b[i] == b'-' || b[i] == b'+') && !matches!(b[i - 1], b'e' | b'E') {
                        break;
                    }
                    i += 1;
                }
                let lit = &text[start..i];
                let v: f64 = lit.parse().map_err(|_| format!("bad number `{lit}`"))?;
                out.push(GTok::Num(v));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_' || b[i] == b'-') {
                    i += 1;
                }
                out.push(GTok::Name(text[start..i].to_string()));
            }
            _ => return Err(format!("unexpected character `{c}` in guard")),
        }
    }
    Ok(out)
}

struct GuardParser<'a> {
    toks: Vec<GTok>,
    pos: usize,
    vars: &'a HashMap<String, usize>,
}

impl GuardParser<'_> {
    fn peek(&self) -> Option<&GTok> {
        self.toks.get(self.pos)
    }

    fn or(&mut self) -> Result<Guard, String> {
        let mut g = self.and()?;
        while self.peek() == Some(&GTok::Or) {
            self.pos += 1;
            g = Guard::or(g, self.and()?);
        }
        Ok(g)
    }

    fn and(&mut self) -> Result<Guard, String> {
        let mut g = self.atom()?;
        while self.peek() == Some(&GTok::And) {
            self.pos += 1;
            g = Guard::and(g, self.atom()?);
        }
        Ok(g)
    }

    fn var(&self, name: &str) -> Result<usize, String> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| format!("undeclared variable `{name}` in guard"))
    }

    fn atom(&mut self) -> Result<Guard, String> {
        let t = self.toks.get(self.pos).cloned();
        let next = |p: &Self, k: usize| p.toks.get(p.pos + k).cloned();
        match t {
            Some(GTok::Open) => {
                self.pos += 1;
                let g = self.or()?;
                if self.peek() != Some(&GTok::Close) {
                    return Err("expected `)` in guard".into());
                }
                self.pos += 1;
                Ok(g)
            }
            Some(GTok::Num(bound)) => match (next(self, 1), next(self, 2)) {
                (Some(GTok::Lt), Some(GTok::Name(n))) => {
                    self.pos += 3;
                    Ok(Guard::Lower { var: self.var(&n)?, bound })
                }
                _ => Err("expected `NUM < NAME`".into()),
            },
            Some(GTok::Name(n)) => match (next(self, 1), next(self, 2)) {
                (Some(GTok::Lt), Some(GTok::Num(bound))) => {
                    self.pos += 3;
                    Ok(Guard::Upper { var: self.var(&n)?, bound })
                }
                _ => Err("expected `NAME < NUM`".into()),
            },
            _ => Err("expected a guard atom".into()),
        }
    }
}

/// Parses a guard over the given variable names.
pub fn parse_guard(text: &str, variables: &[String]) -> Result<Guard, String> {
    let vars: HashMap<String, usize> = variables.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
    let mut p = GuardParser {
        toks: guard_tokens(text)?,
        pos: 0,
        vars: &vars,
    };
    let g = p.or()?;
    if p.pos != p.toks.len() {
        return Err("trailing input in guard".into());
    }
    Ok(g)
}

// ---------------------------------------------------------------------------
// init, inputs

#[derive(Debug, Clone, PartialEq)]
pub struct InitBox {
    pub intervals: Vec<(f64, f64)>,
}

impl InitBox {
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).product()
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        self.intervals.iter().zip(v).all(|((lo, hi), x)| lo < x && x < hi)
    }
}

/// Piecewise-constant signal given by `(start time, value)` breakpoints in
/// model time. The first breakpoint starts at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSignal {
    pub name: String,
    pub breakpoints: Vec<(f64, f64)>,
}

impl InputSignal {
    pub fn new(name: impl Into<String>, breakpoints: Vec<(f64, f64)>) -> Self {
        InputSignal {
            name: name.into(),
            breakpoints,
        }
    }

    /// Square wave starting high at time 0, switching every half period, with
    /// breakpoints covering `[0, until]`.
    pub fn square_wave(name: impl Into<String>, period: f64, high: f64, low: f64, until: f64) -> Self {
        let mut bps = Vec::new();
        let mut k = 0u32;
        loop {
            let t = k as f64 * period / 2.0;
            if t > until && k > 0 {
                break;
            }
            bps.push((t, if k % 2 == 0 { high } else { low }));
            k += 1;
        }
        InputSignal::new(name, bps)
    }

    fn validate(&self) -> Result<(), String> {
        if self.breakpoints.is_empty() {
            return Err(format!("input `{}` has no breakpoints", self.name));
        }
        if self.breakpoints[0].0 != 0.0 {
            return Err(format!("input `{}` must start at time 0", self.name));
        }
        for w in self.breakpoints.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(format!("input `{}` breakpoints are not strictly increasing", self.name));
            }
        }
        if self.breakpoints.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(format!("input `{}` has a non-finite breakpoint", self.name));
        }
        Ok(())
    }
}

/// Value of the most recent breakpoint at or before `t`.
pub fn input_value(s: &InputSignal, t: f64) -> Result<f64, ModelError> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ModelError::InputRange {
            name: s.name.clone(),
            t,
        });
    }
    let idx = s.breakpoints.partition_point(|(start, _)| *start <= t);
    if idx == 0 {
        return Err(ModelError::InputRange {
            name: s.name.clone(),
            t,
        });
    }
    Ok(s.breakpoints[idx - 1].1)
}

// ---------------------------------------------------------------------------
// automaton

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub name: String,
    pub labels: Vec<String>,
    /// Parameter overrides local to this mode.
    pub constants: Vec<(String, f64)>,
    pub rhs: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub source: usize,
    pub target: usize,
    pub guard: Guard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridAutomaton {
    pub name: String,
    pub variables: Vec<String>,
    pub parameters: Vec<(String, f64)>,
    pub inputs: Vec<InputSignal>,
    pub modes: Vec<Mode>,
    pub initial_mode: usize,
    pub transitions: Vec<Transition>,
    pub init: InitBox,
    /// Model time covered by one step.
    pub delta: f64,
    /// Longest trajectory (in steps) the model is meant to be run for.
    pub horizon: usize,
}

impl HybridAutomaton {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    pub fn mode_index(&self, name: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.name == name)
    }

    pub fn parameter(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    /// Replaces a global parameter value.
    pub fn set_parameter(&mut self, name: &str, value: f64) -> Result<(), ModelError> {
        match self.parameters.iter_mut().find(|(n, _)| n == name) {
            Some(slot) => {
                slot.1 = value;
                Ok(())
            }
            None => Err(ModelError::Undeclared(name.to_string())),
        }
    }

    /// Distinct labels over all modes, in first-seen order.
    pub fn labels(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for m in &self.modes {
            for l in &m.labels {
                if seen.insert(l.clone()) {
                    out.push(l.clone());
                }
            }
        }
        out
    }

    pub fn outgoing(&self, mode: usize) -> impl Iterator<Item = (usize, &Transition)> {
        self.transitions
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.source == mode)
    }

    pub fn symbols(&self) -> SymbolTable {
        let mut s = SymbolTable::new();
        for v in &self.variables {
            s.declare(v.clone(), SymbolKind::Variable);
        }
        for (p, _) in &self.parameters {
            s.declare(p.clone(), SymbolKind::Parameter);
        }
        for i in &self.inputs {
            s.declare(i.name.clone(), SymbolKind::Input);
        }
        s
    }

    /// Checks every structural invariant. Returns warnings that do not make
    /// the model invalid.
    pub fn validate(&self) -> Result<Vec<String>, ModelError> {
        let n = self.dim();
        let invalid = |m: String| Err(ModelError::Invalid(m));
        if n == 0 {
            return invalid("no state variables".into());
        }
        if self.modes.is_empty() {
            return Err(ModelError::NoModes);
        }
        let mut names = HashSet::new();
        for name in self
            .variables
            .iter()
            .chain(self.parameters.iter().map(|(p, _)| p))
            .chain(self.inputs.iter().map(|i| &i.name))
        {
            if !names.insert(name) {
                return invalid(format!("symbol `{name}` declared twice"));
            }
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return invalid(format!("delta must be positive, got {}", self.delta));
        }
        if self.horizon == 0 {
            return invalid("horizon must be at least 1".into());
        }
        if self.initial_mode >= self.modes.len() {
            return invalid("initial mode out of range".into());
        }
        if self.init.intervals.len() != n {
            return invalid(format!("init box has {} intervals for {n} variables", self.init.intervals.len()));
        }
        for (i, (lo, hi)) in self.init.intervals.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(ModelError::BadInit {
                    var: self.variables[i].clone(),
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        for input in &self.inputs {
            input.validate().map_err(ModelError::Invalid)?;
        }
        let mut mode_names = HashSet::new();
        let mut warnings = Vec::new();
        for m in &self.modes {
            if !mode_names.insert(&m.name) {
                return invalid(format!("mode `{}` declared twice", m.name));
            }
            if m.rhs.len() != n {
                return invalid(format!("mode `{}` has {} equations for {n} variables", m.name, m.rhs.len()));
            }
            for (c, _) in &m.constants {
                if self.parameter(c).is_none() {
                    return Err(ModelError::Undeclared(c.clone()));
                }
            }
            let symbols = self.symbols();
            for e in &m.rhs {
                let mut bad = None;
                e.visit_symbols(&mut |name, kind| {
                    if symbols.kind(name) != Some(kind) && bad.is_none() {
                        bad = Some(name.to_string());
                    }
                });
                if let Some(name) = bad {
                    return Err(ModelError::Undeclared(name));
                }
                if e.contains_select() {
                    warnings.push(format!(
                        "mode `{}` uses select(), which may make its vector field non-smooth",
                        m.name
                    ));
                }
            }
        }
        for t in &self.transitions {
            if t.source >= self.modes.len() || t.target >= self.modes.len() {
                return invalid("transition endpoint out of range".into());
            }
            if t.guard.max_var() >= n {
                return invalid("guard refers to a variable out of range".into());
            }
        }
        Ok(warnings)
    }
}

// ---------------------------------------------------------------------------
// text format

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn unquote(s: &str, line: usize) -> Result<String, ModelError> {
    let s = s.trim();
    if s.len() < 2 || !s.starts_with('"') || !s.ends_with('"') {
        return schema(line, "expected a quoted string");
    }
    let inner = &s[1..s.len() - 1];
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(e) => out.push(e),
                None => return schema(line, "dangling escape"),
            }
        } else if c == '"' {
            return schema(line, "unescaped quote in string");
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Renders the canonical text form. `parse_model(&serialize_model(h))`
/// reproduces `h`.
pub fn serialize_model(h: &HybridAutomaton) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "name {}", h.name);
    let _ = writeln!(s, "delta {}", h.delta);
    let _ = writeln!(s, "horizon {}", h.horizon);
    s.push_str("\n[variables]\n");
    for v in &h.variables {
        let _ = writeln!(s, "{v}");
    }
    if !h.parameters.is_empty() {
        s.push_str("\n[parameters]\n");
        for (p, v) in &h.parameters {
            let _ = writeln!(s, "{p} = {v}");
        }
    }
    if !h.inputs.is_empty() {
        s.push_str("\n[inputs]\n");
        for i in &h.inputs {
            let bps: Vec<String> = i.breakpoints.iter().map(|(t, v)| format!("{t}: {v}")).collect();
            let _ = writeln!(s, "{} = {}", i.name, bps.join("; "));
        }
    }
    s.push_str("\n[init]\ndistribution = uniform\n");
    for (v, (lo, hi)) in h.variables.iter().zip(&h.init.intervals) {
        let _ = writeln!(s, "{v} = ({lo}, {hi})");
    }
    s.push_str("\n[modes]\n");
    let _ = writeln!(s, "initial = {}", h.modes[h.initial_mode].name);
    for m in &h.modes {
        let _ = writeln!(s, "mode {}", m.name);
        for l in &m.labels {
            let _ = writeln!(s, "  label {}", quote(l));
        }
        for (c, v) in &m.constants {
            let _ = writeln!(s, "  let {c} = {v}");
        }
        for (v, e) in h.variables.iter().zip(&m.rhs) {
            let _ = writeln!(s, "  ode {v} = {e}");
        }
    }
    if !h.transitions.is_empty() {
        s.push_str("\n[transitions]\n");
        for t in &h.transitions {
            let _ = writeln!(
                s,
                "{} -> {} : {}",
                h.modes[t.source].name,
                h.modes[t.target].name,
                t.guard.display(&h.variables)
            );
        }
    }
    s
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Variables,
    Parameters,
    Inputs,
    Init,
    Modes,
    Transitions,
}

fn parse_num(text: &str, line: usize) -> Result<f64, ModelError> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => schema(line, format!("bad number `{}`", text.trim())),
    }
}

fn split_eq(text: &str, line: usize) -> Result<(&str, &str), ModelError> {
    match text.split_once('=') {
        Some((a, b)) => Ok((a.trim(), b.trim())),
        None => schema(line, "expected `name = value`"),
    }
}

fn check_ident(name: &str, line: usize) -> Result<(), ModelError> {
    let mut chars = name.chars();
    let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if ok {
        Ok(())
    } else {
        schema(line, format!("bad identifier `{name}`"))
    }
}

struct PendingMode {
    name: String,
    line: usize,
    labels: Vec<String>,
    constants: Vec<(String, f64)>,
    odes: Vec<(usize, String, String)>,
}

/// Parses and validates a model document.
pub fn parse_model(document: &str) -> Result<HybridAutomaton, ModelError> {
    let mut section = Section::Header;
    let mut name = None;
    let mut delta = None;
    let mut horizon = None;
    let mut variables: Vec<String> = Vec::new();
    let mut parameters: Vec<(String, f64)> = Vec::new();
    let mut inputs: Vec<InputSignal> = Vec::new();
    let mut init: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut distribution = None;
    let mut initial = None;
    let mut modes: Vec<PendingMode> = Vec::new();
    let mut transitions: Vec<(usize, String, String, String)> = Vec::new();

    for (idx, raw) in document.lines().enumerate() {
        let line = idx + 1;
        let text = match raw.find('#') {
            // '#' inside a quoted label is kept
            Some(p) if !raw[..p].contains('"') => &raw[..p],
            _ => raw,
        }
        .trim();
        if text.is_empty() {
            continue;
        }
        if text.starts_with('[') && text.ends_with(']') {
            section = match &text[1..text.len() - 1] {
                "variables" => Section::Variables,
                "parameters" => Section::Parameters,
                "inputs" => Section::Inputs,
                "init" => Section::Init,
                "modes" => Section::Modes,
                "transitions" => Section::Transitions,
                other => return schema(line, format!("unknown section `{other}`")),
            };
            continue;
        }
        match section {
            Section::Header => {
                let (key, val) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
                let val = val.trim();
                match key {
                    "name" => name = Some(val.to_string()),
                    "delta" => delta = Some(parse_num(val, line)?),
                    "horizon" => {
                        horizon = Some(val.parse::<usize>().or_else(|_| schema(line, "bad horizon"))?)
                    }
                    _ => return schema(line, format!("unknown header key `{key}`")),
                }
            }
            Section::Variables => {
                for v in text.split_whitespace() {
                    check_ident(v, line)?;
                    variables.push(v.to_string());
                }
            }
            Section::Parameters => {
                let (p, v) = split_eq(text, line)?;
                check_ident(p, line)?;
                parameters.push((p.to_string(), parse_num(v, line)?));
            }
            Section::Inputs => {
                let (p, sched) = split_eq(text, line)?;
                check_ident(p, line)?;
                let mut bps = Vec::new();
                for part in sched.split(';') {
                    let (t, v) = match part.split_once(':') {
                        Some(x) => x,
                        None => return schema(line, "expected `time: value` breakpoints"),
                    };
                    bps.push((parse_num(t, line)?, parse_num(v, line)?));
                }
                inputs.push(InputSignal::new(p, bps));
            }
            Section::Init => {
                let (k, v) = split_eq(text, line)?;
                if k == "distribution" {
                    if v != "uniform" {
                        return schema(line, format!("unsupported initial distribution `{v}`"));
                    }
                    distribution = Some(v.to_string());
                    continue;
                }
                let inner = v
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| ModelError::Schema {
                        line,
                        msg: "init intervals are written `(lo, hi)`".into(),
                    })?;
                let (lo, hi) = match inner.split_once(',') {
                    Some(x) => x,
                    None => return schema(line, "expected `(lo, hi)`"),
                };
                if init.insert(k.to_string(), (parse_num(lo, line)?, parse_num(hi, line)?)).is_some() {
                    return schema(line, format!("duplicate init interval for `{k}`"));
                }
            }
            Section::Modes => {
                if let Some(rest) = text.strip_prefix("initial") {
                    let (_, m) = split_eq(rest, line).or_else(|_| split_eq(text, line))?;
                    initial = Some((line, m.to_string()));
                } else if let Some(rest) = text.strip_prefix("mode ") {
                    let n = rest.trim();
                    check_ident(n, line)?;
                    modes.push(PendingMode {
                        name: n.to_string(),
                        line,
                        labels: Vec::new(),
                        constants: Vec::new(),
                        odes: Vec::new(),
                    });
                } else {
                    let Some(m) = modes.last_mut() else {
                        return schema(line, "mode item before any `mode` line");
                    };
                    if let Some(rest) = text.strip_prefix("label ") {
                        m.labels.push(unquote(rest, line)?);
                    } else if let Some(rest) = text.strip_prefix("let ") {
                        let (c, v) = split_eq(rest, line)?;
                        m.constants.push((c.to_string(), parse_num(v, line)?));
                    } else if let Some(rest) = text.strip_prefix("ode ") {
                        let (v, e) = split_eq(rest, line)?;
                        m.odes.push((line, v.to_string(), e.to_string()));
                    } else {
                        return schema(line, format!("unknown mode item `{text}`"));
                    }
                }
            }
            Section::Transitions => {
                let (ends, guard) = match text.split_once(':') {
                    Some(x) => x,
                    None => return schema(line, "expected `src -> dst : guard`"),
                };
                let (src, dst) = match ends.split_once("->") {
                    Some(x) => x,
                    None => return schema(line, "expected `src -> dst`"),
                };
                transitions.push((line, src.trim().into(), dst.trim().into(), guard.trim().into()));
            }
        }
    }

    let name = name.unwrap_or_else(|| "unnamed".to_string());
    let delta = delta.ok_or(ModelError::Schema { line: 0, msg: "missing `delta`".into() })?;
    let horizon = horizon.ok_or(ModelError::Schema { line: 0, msg: "missing `horizon`".into() })?;
    if distribution.is_none() {
        return schema(0, "missing `distribution = uniform` in [init]");
    }
    if modes.is_empty() {
        return Err(ModelError::NoModes);
    }
    let mut intervals = Vec::with_capacity(variables.len());
    for v in &variables {
        match init.remove(v) {
            Some(iv) => intervals.push(iv),
            None => return schema(0, format!("no init interval for `{v}`")),
        }
    }
    if let Some(extra) = init.keys().next() {
        return Err(ModelError::Undeclared(extra.clone()));
    }

    let mut h = HybridAutomaton {
        name,
        variables,
        parameters,
        inputs,
        modes: Vec::new(),
        initial_mode: 0,
        transitions: Vec::new(),
        init: InitBox { intervals },
        delta,
        horizon,
    };
    let symbols = h.symbols();
    for pm in &modes {
        let mut rhs: Vec<Option<Expr>> = vec![None; h.dim()];
        for (line, v, text) in &pm.odes {
            let Some(i) = h.var_index(v) else {
                return Err(ModelError::Undeclared(v.clone()));
            };
            if rhs[i].is_some() {
                return schema(*line, format!("duplicate equation for `{v}` in mode `{}`", pm.name));
            }
            rhs[i] = Some(parse_expr(text, &symbols).map_err(|source| ModelError::Expr { line: *line, source })?);
        }
        let rhs: Option<Vec<Expr>> = rhs.into_iter().collect();
        let Some(rhs) = rhs else {
            return schema(pm.line, format!("mode `{}` does not define every variable", pm.name));
        };
        h.modes.push(Mode {
            name: pm.name.clone(),
            labels: pm.labels.clone(),
            constants: pm.constants.clone(),
            rhs,
        });
    }
    h.initial_mode = match initial {
        Some((line, m)) => match h.mode_index(&m) {
            Some(i) => i,
            None => return schema(line, format!("unknown initial mode `{m}`")),
        },
        None => 0,
    };
    for (line, src, dst, guard) in transitions {
        let source = h.mode_index(&src).ok_or(ModelError::Schema {
            line,
            msg: format!("unknown mode `{src}`"),
        })?;
        let target = h.mode_index(&dst).ok_or(ModelError::Schema {
            line,
            msg: format!("unknown mode `{dst}`"),
        })?;
        let guard = parse_guard(&guard, &h.variables).map_err(|msg| ModelError::Schema { line, msg })?;
        h.transitions.push(Transition { source, target, guard });
    }
    h.validate()?;
    Ok(h)
}

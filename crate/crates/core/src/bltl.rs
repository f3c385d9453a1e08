//! Bounded LTL over discrete traces.
//!
//! Property text grammar, lowest precedence first:
//!
//! ```text
//! or      := and ('|' and)*
//! and     := until ('&' until)*
//! until   := unary ('U<=' N until)?          right associative
//! unary   := '!' unary | 'F<=' N unary | 'G<=' N unary | primary
//! primary := '(' or ')' | '[' atom ']' | 'true' | 'false'
//! atom    := LABEL | NUM ('<' | '<=') NAME | NAME ('<' | '<=') NUM
//! ```
//!
//! `&&` and `||` are accepted as synonyms. Both `<` and `<=` in a
//! quantitative atom denote the strict comparison; on trajectories that never
//! hit the constant exactly the two readings agree.
//!
//! Bounds count trace positions. [`scale_bounds`] converts bounds written in
//! model time into steps.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

use crate::model::HybridAutomaton;
use crate::sampler::Trajectory;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BltlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("temporal bounds must be positive")]
    NonPositiveBound,
    #[error("trace of length {len} is too short: position {position} needs {needed} positions")]
    TraceTooShort { len: usize, position: usize, needed: usize },
    #[error("bound {bound} scaled by {factor} is not a whole number of steps")]
    Scale { bound: usize, factor: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Atom {
    Label(String),
    /// `x < c`
    Below { var: String, c: f64 },
    /// `c < x`
    Above { var: String, c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Until(usize, Box<Formula>, Box<Formula>),
    Eventually(usize, Box<Formula>),
    Always(usize, Box<Formula>),
}

impl Formula {
    pub fn label(name: &str) -> Formula {
        Formula::Atom(Atom::Label(name.to_string()))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn until(bound: usize, a: Formula, b: Formula) -> Formula {
        Formula::Until(bound, Box::new(a), Box::new(b))
    }

    pub fn eventually(bound: usize, f: Formula) -> Formula {
        Formula::Eventually(bound, Box::new(f))
    }

    pub fn always(bound: usize, f: Formula) -> Formula {
        Formula::Always(bound, Box::new(f))
    }

    fn visit_atoms<'a>(&'a self, f: &mut dyn FnMut(&'a Atom)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => f(a),
            Formula::Not(x) | Formula::Eventually(_, x) | Formula::Always(_, x) => x.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = Vec::new();
        self.visit_atoms(&mut |a| {
            if !out.contains(a) {
                out.push(a.clone())
            }
        });
        out
    }

    pub fn has_quantitative_atoms(&self) -> bool {
        self.atoms().iter().any(|a| !matches!(a, Atom::Label(_)))
    }

    /// Threshold constants of the quantitative atoms, one set per variable.
    pub fn constants(&self, variables: &[String]) -> Result<Vec<Vec<f64>>, BltlError> {
        let mut out = vec![Vec::new(); variables.len()];
        for a in self.atoms() {
            if let Atom::Below { var, c } | Atom::Above { var, c } = &a {
                let i = variables
                    .iter()
                    .position(|v| v == var)
                    .ok_or_else(|| BltlError::UnknownVariable(var.clone()))?;
                if !out[i].contains(c) {
                    out[i].push(*c);
                }
            }
        }
        Ok(out)
    }

    fn is_negation_normal(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => true,
            Formula::Not(x) => matches!(**x, Formula::Atom(_)),
            Formula::Eventually(_, x) | Formula::Always(_, x) => x.is_negation_normal(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Until(_, a, b) => {
                a.is_negation_normal() && b.is_negation_normal()
            }
        }
    }

    /// True when negation only appears directly above atoms.
    pub fn is_nnf(&self) -> bool {
        self.is_negation_normal()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Label(l) => write!(f, "[{l}]"),
            Atom::Below { var, c } => write!(f, "[{var} < {c}]"),
            Atom::Above { var, c } => write!(f, "[{c} < {var}]"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => write!(f, "!{}", Unary(x)),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Until(n, a, b) => write!(f, "({a} U<={n} {b})"),
            Formula::Eventually(n, x) => write!(f, "F<={n}{}", Unary(x)),
            Formula::Always(n, x) => write!(f, "G<={n}{}", Unary(x)),
        }
    }
}

/// Operand of a prefix operator; parenthesized unless already atomic.
struct Unary<'a>(&'a Formula);

impl fmt::Display for Unary<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Formula::And(..) | Formula::Or(..) | Formula::Until(..) => write!(f, "{}", self.0),
            other => write!(f, "({other})"),
        }
    }
}

// ---------------------------------------------------------------------------
// parsing

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    labels: &'a [String],
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic() || x == '_')
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_' || x == '-')
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, BltlError> {
        Err(BltlError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn rest(&self) -> &str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().unwrap().len_utf8();
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    /// `op<=N` with `op` already recognized at the cursor.
    fn bounded(&mut self, op: &str) -> Result<Option<usize>, BltlError> {
        self.skip_ws();
        let r = self.rest();
        if !r.starts_with(op) {
            return Ok(None);
        }
        let after = r[op.len()..].trim_start();
        if !after.starts_with("<=") {
            return Ok(None);
        }
        self.pos += op.len();
        self.skip_ws();
        self.pos += 2;
        self.skip_ws();
        let digits: String = self.rest().chars().take_while(|c| c.is_ascii_digit()).collect();
        if digits.is_empty() {
            return self.err(format!("expected a bound after `{op}<=`"));
        }
        self.pos += digits.len();
        let n: usize = match digits.parse() {
            Ok(n) => n,
            Err(_) => return self.err("bound too large"),
        };
        if n == 0 {
            return Err(BltlError::NonPositiveBound);
        }
        Ok(Some(n))
    }

    fn or(&mut self) -> Result<Formula, BltlError> {
        let mut f = self.and()?;
        loop {
            if self.eat("||") || self.eat("|") {
                f = Formula::or(f, self.and()?);
            } else {
                return Ok(f);
            }
        }
    }

    fn and(&mut self) -> Result<Formula, BltlError> {
        let mut f = self.until()?;
        loop {
            if self.eat("&&") || self.eat("&") {
                f = Formula::and(f, self.until()?);
            } else {
                return Ok(f);
            }
        }
    }

    fn until(&mut self) -> Result<Formula, BltlError> {
        let lhs = self.unary()?;
        match self.bounded("U")? {
            Some(n) => Ok(Formula::until(n, lhs, self.until()?)),
            None => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, BltlError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if let Some(n) = self.bounded("F")? {
            return Ok(Formula::eventually(n, self.unary()?));
        }
        if let Some(n) = self.bounded("G")? {
            return Ok(Formula::always(n, self.unary()?));
        }
        self.primary()
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let r = self.rest();
        if r.starts_with(word) && !r[word.len()..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    fn primary(&mut self) -> Result<Formula, BltlError> {
        if self.eat("(") {
            let f = self.or()?;
            if !self.eat(")") {
                return self.err("expected `)`");
            }
            return Ok(f);
        }
        if self.eat("[") {
            let start = self.pos;
            let Some(len) = self.rest().find(']') else {
                return self.err("unterminated `[`");
            };
            let body = &self.text[start..start + len];
            let atom = self.atom(body)?;
            self.pos = start + len + 1;
            return Ok(Formula::Atom(atom));
        }
        if self.keyword("true") {
            return Ok(Formula::True);
        }
        if self.keyword("false") {
            return Ok(Formula::False);
        }
        if self.rest().is_empty() {
            self.err("unexpected end of property")
        } else {
            self.err("expected a formula")
        }
    }

    fn atom(&self, body: &str) -> Result<Atom, BltlError> {
        let Some(lt) = body.find('<') else {
            let name = body.trim();
            if name.is_empty() {
                return self.err("empty atom");
            }
            if !self.labels.iter().any(|l| l == name) {
                return Err(BltlError::UnknownLabel(name.to_string()));
            }
            return Ok(Atom::Label(name.to_string()));
        };
        let lhs = body[..lt].trim();
        let rhs = body[lt + 1..].strip_prefix('=').unwrap_or(&body[lt + 1..]).trim();
        let num = |s: &str| s.parse::<f64>().ok().filter(|v| v.is_finite());
        match (num(lhs), num(rhs)) {
            (Some(c), None) if is_ident(rhs) => Ok(Atom::Above { var: rhs.to_string(), c }),
            (None, Some(c)) if is_ident(lhs) => Ok(Atom::Below { var: lhs.to_string(), c }),
            _ => self.err(format!("bad comparison atom `[{body}]`")),
        }
    }
}

/// Parses a property. Label atoms must name one of `labels`.
pub fn parse_bltl(text: &str, labels: &[String]) -> Result<Formula, BltlError> {
    let mut p = Parser { text, pos: 0, labels };
    let f = p.or()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// transformations

/// Pushes negations down to the atoms.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    use Formula as F;
    match (f, neg) {
        (F::True, false) | (F::False, true) => F::True,
        (F::True, true) | (F::False, false) => F::False,
        (F::Atom(a), false) => F::Atom(a.clone()),
        (F::Atom(a), true) => F::not(F::Atom(a.clone())),
        (F::Not(x), _) => nnf(x, !neg),
        (F::And(a, b), false) => F::and(nnf(a, false), nnf(b, false)),
        (F::And(a, b), true) => F::or(nnf(a, true), nnf(b, true)),
        (F::Or(a, b), false) => F::or(nnf(a, false), nnf(b, false)),
        (F::Or(a, b), true) => F::and(nnf(a, true), nnf(b, true)),
        (F::Eventually(n, x), false) => F::eventually(*n, nnf(x, false)),
        (F::Eventually(n, x), true) => F::always(*n, nnf(x, true)),
        (F::Always(n, x), false) => F::always(*n, nnf(x, false)),
        (F::Always(n, x), true) => F::eventually(*n, nnf(x, true)),
        (F::Until(n, a, b), false) => F::until(*n, nnf(a, false), nnf(b, false)),
        (F::Until(n, a, b), true) => {
            let not_a = nnf(a, true);
            let not_b = nnf(b, true);
            F::or(
                F::always(*n, not_b.clone()),
                F::until(*n, not_b.clone(), F::and(not_a, not_b)),
            )
        }
    }
}

/// Positions after the current one that can affect the verdict: the largest
/// sum of bounds along any path of the syntax tree.
pub fn horizon(f: &Formula) -> usize {
    match f {
        Formula::True | Formula::False | Formula::Atom(_) => 0,
        Formula::Not(x) => horizon(x),
        Formula::And(a, b) | Formula::Or(a, b) => horizon(a).max(horizon(b)),
        Formula::Until(n, a, b) => n + horizon(a).max(horizon(b)),
        Formula::Eventually(n, x) | Formula::Always(n, x) => n + horizon(x),
    }
}

/// Multiplies every bound by `factor`, e.g. `1 / delta` for bounds written in
/// model time. Fails unless each product is a whole positive number.
pub fn scale_bounds(f: &Formula, factor: f64) -> Result<Formula, BltlError> {
    let scale = |n: usize| -> Result<usize, BltlError> {
        let x = n as f64 * factor;
        let r = x.round();
        if r < 1.0 || (x - r).abs() > 1e-9 * r.max(1.0) {
            return Err(BltlError::Scale { bound: n, factor });
        }
        Ok(r as usize)
    };
    Ok(match f {
        Formula::True | Formula::False | Formula::Atom(_) => f.clone(),
        Formula::Not(x) => Formula::not(scale_bounds(x, factor)?),
        Formula::And(a, b) => Formula::and(scale_bounds(a, factor)?, scale_bounds(b, factor)?),
        Formula::Or(a, b) => Formula::or(scale_bounds(a, factor)?, scale_bounds(b, factor)?),
        Formula::Until(n, a, b) => Formula::until(scale(*n)?, scale_bounds(a, factor)?, scale_bounds(b, factor)?),
        Formula::Eventually(n, x) => Formula::eventually(scale(*n)?, scale_bounds(x, factor)?),
        Formula::Always(n, x) => Formula::always(scale(*n)?, scale_bounds(x, factor)?),
    })
}

// ---------------------------------------------------------------------------
// traces and the reference checker

/// A finite sequence of positions on which atoms can be decided.
pub trait Trace {
    fn len(&self) -> usize;
    fn holds(&self, position: usize, atom: &Atom) -> bool;
}

/// Explicit trace: label sets and named values per position.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateTrace {
    pub variables: Vec<String>,
    pub labels: Vec<HashSet<String>>,
    pub values: Vec<Vec<f64>>,
}

impl StateTrace {
    /// A label-only trace.
    pub fn from_labels(labels: Vec<Vec<&str>>) -> Self {
        let n = labels.len();
        StateTrace {
            variables: Vec::new(),
            labels: labels
                .into_iter()
                .map(|ls| ls.into_iter().map(String::from).collect())
                .collect(),
            values: vec![Vec::new(); n],
        }
    }
}

impl Trace for StateTrace {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn holds(&self, j: usize, atom: &Atom) -> bool {
        let value = |var: &str| {
            let i = self.variables.iter().position(|v| v == var).expect("atom variable not in trace");
            self.values[j][i]
        };
        match atom {
            Atom::Label(l) => self.labels[j].contains(l),
            Atom::Below { var, c } => value(var) < *c,
            Atom::Above { var, c } => *c < value(var),
        }
    }
}

/// A sampled trajectory viewed through the automaton's labels.
pub struct TrajectoryTrace<'a> {
    pub automaton: &'a HybridAutomaton,
    pub trajectory: &'a Trajectory,
}

impl Trace for TrajectoryTrace<'_> {
    fn len(&self) -> usize {
        self.trajectory.len()
    }

    fn holds(&self, j: usize, atom: &Atom) -> bool {
        let h = self.automaton;
        let var = |name: &str| h.var_index(name).expect("atom variable not in automaton");
        match atom {
            Atom::Label(l) => h.modes[self.trajectory.mode(j)].labels.contains(l),
            Atom::Below { var: v, c } => self.trajectory.state(j)[var(v)] < *c,
            Atom::Above { var: v, c } => *c < self.trajectory.state(j)[var(v)],
        }
    }
}

/// Reference semantics at position `j`, read literally off the recursive
/// definition. Requires the trace to cover `j + horizon(f)`.
pub fn check(f: &Formula, trace: &dyn Trace, j: usize) -> Result<bool, BltlError> {
    let needed = j + horizon(f) + 1;
    if trace.len() < needed {
        return Err(BltlError::TraceTooShort {
            len: trace.len(),
            position: j,
            needed,
        });
    }
    Ok(sat(f, trace, j, trace.len() - 1))
}

fn sat(f: &Formula, tr: &dyn Trace, j: usize, last: usize) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(a) => tr.holds(j, a),
        Formula::Not(x) => !sat(x, tr, j, last),
        Formula::And(a, b) => sat(a, tr, j, last) && sat(b, tr, j, last),
        Formula::Or(a, b) => sat(a, tr, j, last) || sat(b, tr, j, last),
        Formula::Until(n, a, b) => {
            (0..=*n).any(|k| j + k <= last && sat(b, tr, j + k, last) && (0..k).all(|i| sat(a, tr, j + i, last)))
        }
        Formula::Eventually(n, x) => (0..=*n).any(|k| j + k <= last && sat(x, tr, j + k, last)),
        Formula::Always(n, x) => (0..=*n).all(|k| j + k > last || sat(x, tr, j + k, last)),
    }
}

// ---------------------------------------------------------------------------
// prefix evaluation

/// Verdict on a trace prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    fn of(b: bool) -> Tri {
        if b {
            Tri::True
        } else {
            Tri::False
        }
    }

    fn not(self) -> Tri {
        match self {
            Tri::True => Tri::False,
            Tri::False => Tri::True,
            Tri::Unknown => Tri::Unknown,
        }
    }

    fn and(self, o: Tri) -> Tri {
        match (self, o) {
            (Tri::False, _) | (_, Tri::False) => Tri::False,
            (Tri::True, Tri::True) => Tri::True,
            _ => Tri::Unknown,
        }
    }

    fn or(self, o: Tri) -> Tri {
        self.not().and(o.not()).not()
    }
}

#[derive(Debug, Clone)]
enum Node {
    True,
    False,
    Atom(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Until(usize, usize, usize),
    Eventually(usize, usize),
    Always(usize, usize),
}

/// Formula flattened into children-first order with deduplicated atoms.
#[derive(Debug, Clone)]
struct Plan {
    nodes: Vec<Node>,
    atoms: Vec<Atom>,
}

impl Plan {
    fn new(f: &Formula) -> Plan {
        let mut p = Plan {
            nodes: Vec::new(),
            atoms: Vec::new(),
        };
        p.push(f);
        p
    }

    fn push(&mut self, f: &Formula) -> usize {
        let node = match f {
            Formula::True => Node::True,
            Formula::False => Node::False,
            Formula::Atom(a) => {
                let i = match self.atoms.iter().position(|x| x == a) {
                    Some(i) => i,
                    None => {
                        self.atoms.push(a.clone());
                        self.atoms.len() - 1
                    }
                };
                Node::Atom(i)
            }
            Formula::Not(x) => Node::Not(self.push(x)),
            Formula::And(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Node::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Node::Or(a, b)
            }
            Formula::Until(n, a, b) => {
                let (a, b) = (self.push(a), self.push(b));
                Node::Until(*n, a, b)
            }
            Formula::Eventually(n, x) => Node::Eventually(*n, self.push(x)),
            Formula::Always(n, x) => Node::Always(*n, self.push(x)),
        };
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    /// Values of the root at positions `0..known`, where `columns[a][j]` is
    /// atom `a` at position `j` and the full trace will have `total` positions.
    fn eval(&self, columns: &[Vec<bool>], known: usize, total: usize) -> Vec<Tri> {
        let last = total.saturating_sub(1);
        let mut vals: Vec<Vec<Tri>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match node {
                Node::True => vec![Tri::True; known],
                Node::False => vec![Tri::False; known],
                Node::Atom(a) => columns[*a][..known].iter().map(|&b| Tri::of(b)).collect(),
                Node::Not(x) => vals[*x].iter().map(|t| t.not()).collect(),
                Node::And(a, b) => vals[*a].iter().zip(&vals[*b]).map(|(x, y)| x.and(*y)).collect(),
                Node::Or(a, b) => vals[*a].iter().zip(&vals[*b]).map(|(x, y)| x.or(*y)).collect(),
                Node::Until(n, a, b) => until(&vals[*a], &vals[*b], *n, known, last),
                Node::Eventually(n, x) => {
                    let always_true = vec![Tri::True; known];
                    until(&always_true, &vals[*x], *n, known, last)
                }
                Node::Always(n, x) => always(&vals[*x], *n, known, last),
            };
            vals.push(v);
        }
        vals.pop().unwrap_or_default()
    }
}

const NEVER: usize = usize::MAX;

/// `out[j]` = first `i >= j` with `pred(vals[i])`, else `fallback`.
fn next_index(vals: &[Tri], fallback: usize, pred: impl Fn(Tri) -> bool) -> Vec<usize> {
    let mut out = vec![fallback; vals.len()];
    let mut next = fallback;
    for j in (0..vals.len()).rev() {
        if pred(vals[j]) {
            next = j;
        }
        out[j] = next;
    }
    out
}

fn until(lhs: &[Tri], rhs: &[Tri], bound: usize, known: usize, last: usize) -> Vec<Tri> {
    // unknown positions (at or past `known`) are neither true nor false
    let rhs_true = next_index(rhs, NEVER, |t| t == Tri::True);
    let rhs_not_false = next_index(rhs, known, |t| t != Tri::False);
    let lhs_not_true = next_index(lhs, known, |t| t != Tri::True);
    let lhs_false = next_index(lhs, NEVER, |t| t == Tri::False);
    (0..known)
        .map(|j| {
            let end = (j + bound).min(last);
            if rhs_true[j] <= end && rhs_true[j] <= lhs_not_true[j] {
                Tri::True
            } else if rhs_not_false[j] > end.min(lhs_false[j]) {
                Tri::False
            } else {
                Tri::Unknown
            }
        })
        .collect()
}

fn always(x: &[Tri], bound: usize, known: usize, last: usize) -> Vec<Tri> {
    let not_true = next_index(x, known, |t| t != Tri::True);
    let first_false = next_index(x, NEVER, |t| t == Tri::False);
    (0..known)
        .map(|j| {
            let end = (j + bound).min(last);
            if first_false[j] <= end {
                Tri::False
            } else if not_true[j] > end {
                Tri::True
            } else {
                Tri::Unknown
            }
        })
        .collect()
}

/// Three-valued values of `f` at positions `0..known` of a trace that will
/// eventually have `total` positions, reading only the first `known`.
pub fn eval_prefix(f: &Formula, trace: &dyn Trace, known: usize, total: usize) -> Vec<Tri> {
    let plan = Plan::new(f);
    let known = known.min(trace.len()).min(total);
    let columns: Vec<Vec<bool>> = plan
        .atoms
        .iter()
        .map(|a| (0..known).map(|j| trace.holds(j, a)).collect())
        .collect();
    plan.eval(&columns, known, total)
}

#[derive(Debug, Clone)]
enum Resolved {
    Modes(Vec<bool>),
    Below(usize, f64),
    Above(usize, f64),
}

/// Incremental verdict at position 0 of a growing trajectory.
#[derive(Debug, Clone)]
pub struct Monitor {
    plan: Plan,
    resolved: Vec<Resolved>,
    columns: Vec<Vec<bool>>,
    seen: usize,
    total: usize,
}

impl Monitor {
    /// Binds `f`'s atoms to `h` for trajectories with `total` positions.
    pub fn new(f: &Formula, h: &HybridAutomaton, total: usize) -> Result<Monitor, BltlError> {
        let plan = Plan::new(f);
        let mut resolved = Vec::with_capacity(plan.atoms.len());
        for a in &plan.atoms {
            let var = |name: &str| h.var_index(name).ok_or_else(|| BltlError::UnknownVariable(name.to_string()));
            resolved.push(match a {
                Atom::Label(l) => {
                    if !h.modes.iter().any(|m| m.labels.contains(l)) {
                        return Err(BltlError::UnknownLabel(l.clone()));
                    }
                    Resolved::Modes(h.modes.iter().map(|m| m.labels.contains(l)).collect())
                }
                Atom::Below { var: v, c } => Resolved::Below(var(v)?, *c),
                Atom::Above { var: v, c } => Resolved::Above(var(v)?, *c),
            });
        }
        let needed = horizon(f) + 1;
        if total < needed {
            return Err(BltlError::TraceTooShort {
                len: total,
                position: 0,
                needed,
            });
        }
        let columns = vec![Vec::with_capacity(total); resolved.len()];
        Ok(Monitor {
            plan,
            resolved,
            columns,
            seen: 0,
            total,
        })
    }

    pub fn known(&self) -> usize {
        self.seen
    }

    /// Reads any positions of `traj` not seen yet.
    pub fn extend(&mut self, traj: &Trajectory) {
        let start = self.known();
        let end = traj.len().min(self.total);
        for (col, r) in self.columns.iter_mut().zip(&self.resolved) {
            for j in start..end {
                col.push(match r {
                    Resolved::Modes(m) => m[traj.mode(j)],
                    Resolved::Below(i, c) => traj.state(j)[*i] < *c,
                    Resolved::Above(i, c) => *c < traj.state(j)[*i],
                });
            }
        }
        self.seen = self.seen.max(end);
    }

    pub fn reset(&mut self) {
        for c in &mut self.columns {
            c.clear();
        }
        self.seen = 0;
    }

    /// Verdict at position 0 given the positions read so far.
    pub fn verdict(&self) -> Tri {
        let known = self.known();
        if known == 0 {
            return Tri::Unknown;
        }
        self.plan.eval(&self.columns, known, self.total)[0]
    }
}

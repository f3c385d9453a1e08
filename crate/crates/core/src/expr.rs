//! Real-valued expressions used as ODE right-hand sides.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := power (('*' | '/') power)*
//! power   := unary ('^' power)?
//! unary   := '-' unary | atom
//! atom    := NUM | IDENT | FUNC '(' args ')' | '(' sum ')'
//! ```
//!
//! Unary minus binds tighter than `^`, so `-x^2` is `(-x)^2`. Identifiers match
//! `[A-Za-z_][A-Za-z0-9_-]*`, which means `a-b` is a single name; write `a - b`
//! for a difference. Functions: `exp ln tanh sqrt abs` (one argument),
//! `pow min max` (two) and `select(c, a, b)`, which yields `a` when `c >= 0`
//! and `b` otherwise.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },
    #[error("unbound symbol `{0}`")]
    Unbound(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Variable,
    Parameter,
    Input,
}

/// Declared names an expression may refer to.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    kinds: HashMap<String, SymbolKind>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, kind: SymbolKind) {
        self.kinds.insert(name.into(), kind);
    }

    pub fn with(mut self, name: &str, kind: SymbolKind) -> Self {
        self.declare(name, kind);
        self
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.kinds.get(name).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Exp,
    Ln,
    Tanh,
    Sqrt,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Param(String),
    Input(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// `cond >= 0 ? then : else`
    Select(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn select(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::Select(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Names of all variables, parameters and inputs appearing in the tree.
    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit_symbols(&mut |name, _| {
            out.insert(name.to_string());
        });
        out
    }

    pub fn visit_symbols(&self, f: &mut dyn FnMut(&str, SymbolKind)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(n) => f(n, SymbolKind::Variable),
            Expr::Param(n) => f(n, SymbolKind::Parameter),
            Expr::Input(n) => f(n, SymbolKind::Input),
            Expr::Unary(_, a) => a.visit_symbols(f),
            Expr::Binary(_, a, b) => {
                a.visit_symbols(f);
                b.visit_symbols(f);
            }
            Expr::Select(c, a, b) => {
                c.visit_symbols(f);
                a.visit_symbols(f);
                b.visit_symbols(f);
            }
        }
    }

    pub fn contains_select(&self) -> bool {
        match self {
            Expr::Select(..) => true,
            Expr::Unary(_, a) => a.contains_select(),
            Expr::Binary(_, a, b) => a.contains_select() || b.contains_select(),
            _ => false,
        }
    }

    /// Evaluates the tree against `env`, which must bind every free symbol.
    pub fn eval(&self, env: &dyn Fn(&str) -> Option<f64>) -> Result<f64, ExprError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(n) | Expr::Param(n) | Expr::Input(n) => {
                env(n).ok_or_else(|| ExprError::Unbound(n.clone()))
            }
            Expr::Unary(op, a) => apply_unary(*op, a.eval(env)?),
            Expr::Binary(op, a, b) => apply_binary(*op, a.eval(env)?, b.eval(env)?),
            Expr::Select(c, a, b) => {
                if c.eval(env)? >= 0.0 {
                    a.eval(env)
                } else {
                    b.eval(env)
                }
            }
        }
    }

    /// Convenience wrapper around [`Expr::eval`] for a name→value map.
    pub fn eval_map(&self, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
        self.eval(&|n| env.get(n).copied())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Expr::Binary(BinaryOp::Pow, ..) => 3,
            Expr::Unary(UnaryOp::Neg, _) => 4,
            _ => 5,
        }
    }
}

fn domain(op: &'static str, detail: String) -> ExprError {
    ExprError::Domain { op, detail }
}

fn finite(op: &'static str, x: f64) -> Result<f64, ExprError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(domain(op, format!("non-finite result {x}")))
    }
}

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> Result<f64, ExprError> {
    match op {
        UnaryOp::Neg => Ok(-a),
        UnaryOp::Exp => finite("exp", a.exp()),
        UnaryOp::Ln => {
            if a <= 0.0 {
                Err(domain("ln", format!("argument {a} is not positive")))
            } else {
                Ok(a.ln())
            }
        }
        UnaryOp::Tanh => Ok(a.tanh()),
        UnaryOp::Sqrt => {
            if a < 0.0 {
                Err(domain("sqrt", format!("argument {a} is negative")))
            } else {
                Ok(a.sqrt())
            }
        }
        UnaryOp::Abs => Ok(a.abs()),
    }
}

pub(crate) fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, ExprError> {
    match op {
        BinaryOp::Add => Ok(a + b),
        BinaryOp::Sub => Ok(a - b),
        BinaryOp::Mul => Ok(a * b),
        BinaryOp::Div => {
            if b == 0.0 {
                Err(domain("division", format!("{a} / 0")))
            } else {
                Ok(a / b)
            }
        }
        BinaryOp::Pow => finite("pow", a.powf(b)),
        BinaryOp::Min => Ok(a.min(b)),
        BinaryOp::Max => Ok(a.max(b)),
    }
}

fn unary_name(op: UnaryOp) -> &'static str {
    match op {
        UnaryOp::Neg => "-",
        UnaryOp::Exp => "exp",
        UnaryOp::Ln => "ln",
        UnaryOp::Tanh => "tanh",
        UnaryOp::Sqrt => "sqrt",
        UnaryOp::Abs => "abs",
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(n) | Expr::Param(n) | Expr::Input(n) => f.write_str(n),
            Expr::Unary(UnaryOp::Neg, a) => {
                if a.precedence() < 4 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Unary(op, a) => write!(f, "{}({a})", unary_name(*op)),
            Expr::Binary(BinaryOp::Min, a, b) => write!(f, "min({a}, {b})"),
            Expr::Binary(BinaryOp::Max, a, b) => write!(f, "max({a}, {b})"),
            Expr::Binary(BinaryOp::Pow, a, b) => {
                // right associative
                let left = a.precedence() <= 3;
                let right = b.precedence() < 3;
                write_operand(f, a, left)?;
                f.write_str("^")?;
                write_operand(f, b, right)
            }
            Expr::Binary(op, a, b) => {
                let p = self.precedence();
                let sym = match op {
                    BinaryOp::Add => " + ",
                    BinaryOp::Sub => " - ",
                    BinaryOp::Mul => " * ",
                    _ => " / ",
                };
                write_operand(f, a, a.precedence() < p)?;
                f.write_str(sym)?;
                write_operand(f, b, b.precedence() <= p)
            }
            Expr::Select(c, a, b) => write!(f, "select({c}, {a}, {b})"),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

// ---------------------------------------------------------------------------
// parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| ExprError::Syntax {
                pos: start,
                msg: format!("bad number `{lit}`"),
            })?;
            out.push((start, Tok::Num(v)));
        } else if is_ident_start(c) {
            let start = i;
            while i < bytes.len() && is_ident_char(bytes[i] as char) {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ExprError::Syntax {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    symbols: &'a SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.eat('+') {
                BinaryOp::Add
            } else if self.eat('-') {
                BinaryOp::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Expr::binary(op, lhs, self.product()?);
        }
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        loop {
            let op = if self.eat('*') {
                BinaryOp::Mul
            } else if self.eat('/') {
                BinaryOp::Div
            } else {
                return Ok(lhs);
            };
            lhs = Expr::binary(op, lhs, self.power()?);
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.eat('^') {
            let exp = self.power()?;
            Ok(Expr::binary(BinaryOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            Ok(Expr::unary(UnaryOp::Neg, self.unary()?))
        } else {
            self.atom()
        }
    }

    fn args(&mut self, n: usize, name: &str) -> Result<Vec<Expr>, ExprError> {
        self.expect('(')?;
        let mut out = vec![self.sum()?];
        while self.eat(',') {
            out.push(self.sum()?);
        }
        if out.len() != n {
            return self.err(format!("`{name}` takes {n} argument(s), got {}", out.len()));
        }
        self.expect(')')?;
        Ok(out)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let call = self.peek() == Some(&Tok::Sym('('));
                if call {
                    let unary = match name.as_str() {
                        "exp" => Some(UnaryOp::Exp),
                        "ln" => Some(UnaryOp::Ln),
                        "tanh" => Some(UnaryOp::Tanh),
                        "sqrt" => Some(UnaryOp::Sqrt),
                        "abs" => Some(UnaryOp::Abs),
                        _ => None,
                    };
                    if let Some(op) = unary {
                        let mut a = self.args(1, &name)?;
                        return Ok(Expr::unary(op, a.remove(0)));
                    }
                    let binary = match name.as_str() {
                        "pow" => Some(BinaryOp::Pow),
                        "min" => Some(BinaryOp::Min),
                        "max" => Some(BinaryOp::Max),
                        _ => None,
                    };
                    if let Some(op) = binary {
                        let mut a = self.args(2, &name)?;
                        let b = a.pop().unwrap();
                        return Ok(Expr::binary(op, a.pop().unwrap(), b));
                    }
                    if name == "select" {
                        let mut a = self.args(3, &name)?;
                        let e = a.pop().unwrap();
                        let t = a.pop().unwrap();
                        return Ok(Expr::select(a.pop().unwrap(), t, e));
                    }
                }
                match self.symbols.kind(&name) {
                    Some(SymbolKind::Variable) => Ok(Expr::Var(name)),
                    Some(SymbolKind::Parameter) => Ok(Expr::Param(name)),
                    Some(SymbolKind::Input) => Ok(Expr::Input(name)),
                    None => Err(ExprError::UnknownIdent(name)),
                }
            }
            Some(t) => self.err(format!("unexpected token {t:?}")),
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses `text` and resolves every identifier against `symbols`.
pub fn parse_expr(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ExprError::Syntax {
            pos: 0,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
        symbols,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// compiled form

/// Where a leaf value comes from once an expression is compiled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    State(usize),
    Input(usize),
    Const(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Push(f64),
    State(usize),
    Input(usize),
    Unary(UnaryOp),
    Binary(BinaryOp),
    /// Pops the condition; jumps when it is negative.
    JumpIfNeg(usize),
    Jump(usize),
}

/// Flat stack program for fast repeated evaluation inside the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    max_stack: usize,
}

impl Program {
    /// Compiles `e`, mapping each symbol through `resolve`. Constant subtrees
    /// are folded when folding does not raise a domain error.
    pub fn compile(
        e: &Expr,
        resolve: &dyn Fn(&str, SymbolKind) -> Option<Slot>,
    ) -> Result<Program, ExprError> {
        let folded = fold(e, resolve)?;
        let mut ops = Vec::new();
        emit(&folded, &mut ops);
        let max_stack = stack_depth(&ops);
        Ok(Program { ops, max_stack })
    }

    pub fn max_stack(&self) -> usize {
        self.max_stack
    }

    /// Evaluates with `stack` as scratch space (cleared on entry).
    #[inline]
    pub fn eval(&self, state: &[f64], inputs: &[f64], stack: &mut Vec<f64>) -> Result<f64, ExprError> {
        stack.clear();
        let mut pc = 0;
        let ops = &self.ops;
        while pc < ops.len() {
            match ops[pc] {
                Op::Push(c) => stack.push(c),
                Op::State(i) => stack.push(state[i]),
                Op::Input(i) => stack.push(inputs[i]),
                Op::Unary(op) => {
                    let a = stack.pop().unwrap();
                    let r = match op {
                        UnaryOp::Neg => -a,
                        UnaryOp::Tanh => a.tanh(),
                        UnaryOp::Abs => a.abs(),
                        _ => apply_unary(op, a)?,
                    };
                    stack.push(r);
                }
                Op::Binary(op) => {
                    let b = stack.pop().unwrap();
                    let a = stack.pop().unwrap();
                    let r = match op {
                        BinaryOp::Add => a + b,
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        _ => apply_binary(op, a, b)?,
                    };
                    stack.push(r);
                }
                Op::JumpIfNeg(t) => {
                    if stack.pop().unwrap() < 0.0 {
                        pc = t;
                        continue;
                    }
                }
                Op::Jump(t) => {
                    pc = t;
                    continue;
                }
            }
            pc += 1;
        }
        Ok(stack.pop().unwrap())
    }
}

enum Leaf {
    Expr(Expr),
    State(usize),
    Input(usize),
}

// Folded tree with resolved leaves.
enum Node {
    Leaf(Leaf),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Select(Box<Node>, Box<Node>, Box<Node>),
}

fn const_of(n: &Node) -> Option<f64> {
    match n {
        Node::Leaf(Leaf::Expr(Expr::Const(c))) => Some(*c),
        _ => None,
    }
}

fn fold(e: &Expr, resolve: &dyn Fn(&str, SymbolKind) -> Option<Slot>) -> Result<Node, ExprError> {
    let leaf = |name: &str, kind| -> Result<Node, ExprError> {
        match resolve(name, kind) {
            Some(Slot::Const(c)) => Ok(Node::Leaf(Leaf::Expr(Expr::Const(c)))),
            Some(Slot::State(i)) => Ok(Node::Leaf(Leaf::State(i))),
            Some(Slot::Input(i)) => Ok(Node::Leaf(Leaf::Input(i))),
            None => Err(ExprError::Unbound(name.to_string())),
        }
    };
    Ok(match e {
        Expr::Const(c) => Node::Leaf(Leaf::Expr(Expr::Const(*c))),
        Expr::Var(n) => leaf(n, SymbolKind::Variable)?,
        Expr::Param(n) => leaf(n, SymbolKind::Parameter)?,
        Expr::Input(n) => leaf(n, SymbolKind::Input)?,
        Expr::Unary(op, a) => {
            let a = fold(a, resolve)?;
            if let Some(Ok(v)) = const_of(&a).map(|c| apply_unary(*op, c)) {
                Node::Leaf(Leaf::Expr(Expr::Const(v)))
            } else {
                Node::Unary(*op, Box::new(a))
            }
        }
        Expr::Binary(op, a, b) => {
            let a = fold(a, resolve)?;
            let b = fold(b, resolve)?;
            match (const_of(&a), const_of(&b)) {
                (Some(x), Some(y)) => match apply_binary(*op, x, y) {
                    Ok(v) => Node::Leaf(Leaf::Expr(Expr::Const(v))),
                    Err(_) => Node::Binary(*op, Box::new(a), Box::new(b)),
                },
                _ => Node::Binary(*op, Box::new(a), Box::new(b)),
            }
        }
        Expr::Select(c, a, b) => {
            let c = fold(c, resolve)?;
            let a = fold(a, resolve)?;
            let b = fold(b, resolve)?;
            match const_of(&c) {
                Some(v) if v >= 0.0 => a,
                Some(_) => b,
                None => Node::Select(Box::new(c), Box::new(a), Box::new(b)),
            }
        }
    })
}

fn emit(n: &Node, ops: &mut Vec<Op>) {
    match n {
        Node::Leaf(Leaf::Expr(Expr::Const(c))) => ops.push(Op::Push(*c)),
        Node::Leaf(Leaf::Expr(_)) => unreachable!("only constants survive folding"),
        Node::Leaf(Leaf::State(i)) => ops.push(Op::State(*i)),
        Node::Leaf(Leaf::Input(i)) => ops.push(Op::Input(*i)),
        Node::Unary(op, a) => {
            emit(a, ops);
            ops.push(Op::Unary(*op));
        }
        Node::Binary(op, a, b) => {
            emit(a, ops);
            emit(b, ops);
            ops.push(Op::Binary(*op));
        }
        Node::Select(c, a, b) => {
            emit(c, ops);
            let jneg = ops.len();
            ops.push(Op::JumpIfNeg(0));
            emit(a, ops);
            let jend = ops.len();
            ops.push(Op::Jump(0));
            let else_start = ops.len();
            emit(b, ops);
            let end = ops.len();
            ops[jneg] = Op::JumpIfNeg(else_start);
            ops[jend] = Op::Jump(end);
        }
    }
}

fn stack_depth(ops: &[Op]) -> usize {
    // Both select branches leave one value, so a linear scan over-approximates.
    let mut depth: isize = 0;
    let mut max = 0;
    for op in ops {
        depth += match op {
            Op::Push(_) | Op::State(_) | Op::Input(_) => 1,
            Op::Unary(_) | Op::Jump(_) => 0,
            Op::Binary(_) | Op::JumpIfNeg(_) => -1,
        };
        max = max.max(depth);
    }
    max.max(1) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn syms() -> SymbolTable {
        SymbolTable::new()
            .with("x1", SymbolKind::Variable)
            .with("x", SymbolKind::Variable)
            .with("u", SymbolKind::Variable)
            .with("k", SymbolKind::Parameter)
            .with("k_s", SymbolKind::Parameter)
            .with("u_s", SymbolKind::Parameter)
            .with("k16", SymbolKind::Parameter)
            .with("PER", SymbolKind::Variable)
            .with("CRY", SymbolKind::Variable)
            .with("PER-CRY", SymbolKind::Variable)
            .with("eps", SymbolKind::Input)
    }

    fn p(s: &str) -> Expr {
        parse_expr(s, &syms()).unwrap()
    }

    fn ev(e: &Expr, pairs: &[(&str, f64)]) -> Result<f64, ExprError> {
        let m: HashMap<String, f64> = pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        e.eval_map(&m)
    }

    // Taylor series of exp around zero, independent of the libm routine.
    fn taylor_exp(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for n in 1..40 {
            term *= x / n as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn parses_with_precedence() {
        let e = p("-x1 + 2*k");
        let want = Expr::binary(
            BinaryOp::Add,
            Expr::unary(UnaryOp::Neg, Expr::Var("x1".into())),
            Expr::binary(BinaryOp::Mul, Expr::Const(2.0), Expr::Param("k".into())),
        );
        assert_eq!(e, want);
    }

    #[test]
    fn unary_binds_tighter_than_pow() {
        assert_eq!(ev(&p("-x^2"), &[("x", 3.0)]).unwrap(), 9.0);
        assert_eq!(ev(&p("-(x^2)"), &[("x", 3.0)]).unwrap(), -9.0);
        // right associative
        assert_eq!(ev(&p("2^3^2"), &[]).unwrap(), 512.0);
    }

    #[test]
    fn rejects_unknown_identifier() {
        let err = parse_expr("exp(-t)*x1", &syms()).unwrap_err();
        assert_eq!(err, ExprError::UnknownIdent("t".into()));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_expr("x1 + * 2", &syms()) {
            Err(ExprError::Syntax { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_expr("", &syms()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("(x1", &syms()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("min(x1)", &syms()), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_expr("x1 $", &syms()), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn parses_cardiac_subterm() {
        let e = p("tanh(k_s*(u - u_s))");
        let v = ev(&e, &[("k_s", 2.994), ("u", 1.0), ("u_s", 0.9087)]).unwrap();
        assert!((v - (2.994f64 * 0.0913).tanh()).abs() < 1e-15);
    }

    #[test]
    fn hyphenated_identifiers() {
        let e = p("PER-CRY - 1");
        assert_eq!(e.free_symbols().into_iter().collect::<Vec<_>>(), vec!["PER-CRY"]);
        assert_eq!(ev(&e, &[("PER-CRY", 3.0)]).unwrap(), 2.0);
    }

    #[test]
    fn evaluates_basic_cases() {
        assert_eq!(Expr::Const(3.5).eval(&|_| None).unwrap(), 3.5);
        assert_eq!(ev(&p("-x1"), &[("x1", 2.0)]).unwrap(), -2.0);
        let v = ev(&p("exp(-1)"), &[]).unwrap();
        assert!((v - taylor_exp(-1.0)).abs() < 1e-9);
        assert!((v - 0.367879441).abs() < 1e-9);
        assert_eq!(ev(&p("select(x - 1, 10, 20)"), &[("x", 1.0)]).unwrap(), 10.0);
        assert_eq!(ev(&p("select(x - 1, 10, 20)"), &[("x", 0.5)]).unwrap(), 20.0);
        assert_eq!(ev(&p("max(x, 2) + min(x, 2)"), &[("x", 5.0)]).unwrap(), 7.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ev(&p("1/x"), &[("x", 0.0)]), Err(ExprError::Domain { op: "division", .. })));
        assert!(matches!(ev(&p("ln(x)"), &[("x", 0.0)]), Err(ExprError::Domain { op: "ln", .. })));
        assert!(matches!(ev(&p("ln(x)"), &[("x", -1.0)]), Err(ExprError::Domain { .. })));
        assert!(matches!(ev(&p("sqrt(x)"), &[("x", -1.0)]), Err(ExprError::Domain { .. })));
        assert!(matches!(ev(&p("exp(x)"), &[("x", 1e5)]), Err(ExprError::Domain { .. })));
        assert!(matches!(ev(&p("x^0.5"), &[("x", -1.0)]), Err(ExprError::Domain { .. })));
        assert_eq!(ev(&p("x1"), &[]), Err(ExprError::Unbound("x1".into())));
    }

    #[test]
    fn free_symbols_cases() {
        assert!(Expr::Const(1.0).free_symbols().is_empty());
        assert_eq!(p("x1+x1").free_symbols().len(), 1);
        let s: Vec<_> = p("k16*PER*CRY").free_symbols().into_iter().collect();
        assert_eq!(s, vec!["CRY", "PER", "k16"]);
    }

    #[test]
    fn pretty_print_is_minimal_and_reparses() {
        for (src, want) in [
            ("x1 - (x - u)", "x1 - (x - u)"),
            ("(x1 - x) - u", "x1 - x - u"),
            ("-(x^2)", "-(x^2)"),
            ("(-x)^2", "-x^2"),
            ("(x^2)^3", "(x^2)^3"),
            ("x^(2^3)", "x^2^3"),
            ("pow(x, 2)", "x^2"),
            ("--x", "--x"),
            ("x1 * (k + 1) / 2", "x1 * (k + 1) / 2"),
            ("select(x, 1, min(u, 2))", "select(x, 1, min(u, 2))"),
        ] {
            let e = p(src);
            assert_eq!(e.to_string(), want);
            assert_eq!(p(&e.to_string()), e);
        }
    }

    #[test]
    fn compiled_program_matches_tree() {
        let s = syms();
        let e = p("select(u - 0.3, tanh(k_s*(u - u_s)), -exp(x)) * eps + k^2 / 4");
        let params: HashMap<&str, f64> = [("k_s", 2.994), ("u_s", 0.9087), ("k", 3.0)].into();
        let prog = Program::compile(&e, &|n, kind| match kind {
            SymbolKind::Variable => Some(Slot::State(if n == "u" { 0 } else { 1 })),
            SymbolKind::Input => Some(Slot::Input(0)),
            SymbolKind::Parameter => params.get(n).map(|v| Slot::Const(*v)),
        })
        .unwrap();
        let _ = s;
        let mut stack = Vec::new();
        for (u, x, eps) in [(0.1, 0.2, 1.0), (0.9, -0.5, 0.0), (0.3, 1.5, 2.0)] {
            let tree = ev(&e, &[("u", u), ("x", x), ("eps", eps), ("k_s", 2.994), ("u_s", 0.9087), ("k", 3.0)])
                .unwrap();
            let fast = prog.eval(&[u, x], &[eps], &mut stack).unwrap();
            assert_eq!(tree, fast);
        }
        assert!(prog.max_stack() >= 2);
    }

    #[test]
    fn compiled_program_reports_domain_errors() {
        let e = p("1 / (x - 1)");
        let prog = Program::compile(&e, &|_, _| Some(Slot::State(0))).unwrap();
        let mut stack = Vec::new();
        assert!(prog.eval(&[1.0], &[], &mut stack).is_err());
        assert_eq!(prog.eval(&[2.0], &[], &mut stack).unwrap(), 1.0);
    }

    #[test]
    fn select_detection() {
        assert!(p("1 + select(x, 1, 2)").contains_select());
        assert!(!p("1 + x").contains_select());
    }
}

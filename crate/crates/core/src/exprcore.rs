//! Minimal CAS core: expression trees with exact differentiation, substitution,
//! constant folding and f64 evaluation.
//!
//! Design notes: `Power` exponents are numeric constants (rational where
//! possible); general powers a^b are encoded as Exp(b*Ln(a)). No general
//! simplifier — identity checks are numeric-at-sampled-points by contract.

use num_rational::Rational64;
use num_traits::Zero;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Rat = Rational64;

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// Numeric constant: exact rational when possible, f64 otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Num {
    Rat(Rat),
    F(f64),
}

impl Num {
    pub fn zero() -> Num {
        Num::Rat(Rat::zero())
    }
    pub fn one() -> Num {
        Num::Rat(Rat::new(1, 1))
    }
    pub fn from_int(i: i64) -> Num {
        Num::Rat(Rat::new(i, 1))
    }
    pub fn to_f64(self) -> f64 {
        match self {
            Num::Rat(r) => *r.numer() as f64 / *r.denom() as f64,
            Num::F(f) => f,
        }
    }
    pub fn is_zero(self) -> bool {
        match self {
            Num::Rat(r) => r.is_zero(),
            Num::F(f) => f == 0.0,
        }
    }
    pub fn is_one(self) -> bool {
        match self {
            Num::Rat(r) => r == Rat::new(1, 1),
            Num::F(f) => f == 1.0,
        }
    }
    pub fn is_integer(self) -> bool {
        match self {
            Num::Rat(r) => r.is_integer(),
            Num::F(f) => f.fract() == 0.0 && f.abs() < 1e15,
        }
    }
    pub fn as_integer(self) -> Option<i64> {
        match self {
            Num::Rat(r) if r.is_integer() => Some(*r.numer()),
            Num::F(f) if f.fract() == 0.0 && f.abs() < 1e15 => Some(f as i64),
            _ => None,
        }
    }
    pub fn add(self, o: Num) -> Num {
        match (self, o) {
            (Num::Rat(a), Num::Rat(b)) => Num::Rat(a + b),
            _ => Num::F(self.to_f64() + o.to_f64()),
        }
    }
    pub fn mul(self, o: Num) -> Num {
        match (self, o) {
            (Num::Rat(a), Num::Rat(b)) => Num::Rat(a * b),
            _ => Num::F(self.to_f64() * o.to_f64()),
        }
    }
    pub fn neg(self) -> Num {
        match self {
            Num::Rat(a) => Num::Rat(-a),
            Num::F(f) => Num::F(-f),
        }
    }
    /// self^o when representable exactly, None otherwise.
    fn pow_exact(self, o: Num) -> Option<Num> {
        let e = match o {
            Num::Rat(r) if r.is_integer() => *r.numer(),
            Num::F(f) if f.fract() == 0.0 && f.abs() < 64.0 => f as i64,
            _ => return None,
        };
        match self {
            Num::Rat(a) => {
                if e.unsigned_abs() > 64 {
                    return None;
                }
                if a.is_zero() && e < 0 {
                    return None;
                }
                Some(Num::Rat(a.pow(e as i32)))
            }
            Num::F(f) => Some(Num::F(f.powi(e as i32))),
        }
    }
}

/// The declared variables of the problem domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    T,
    U,
    Ux,
    Ut,
    Psi,
    Eps,
    F,
    Fp,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::T => "t",
            Var::U => "u",
            Var::Ux => "u_x",
            Var::Ut => "u_t",
            Var::Psi => "psi",
            Var::Eps => "eps",
            Var::F => "F",
            Var::Fp => "F'",
        }
    }
    pub fn from_name(s: &str) -> Option<Var> {
        Some(match s {
            "x" => Var::X,
            "t" => Var::T,
            "u" => Var::U,
            "u_x" => Var::Ux,
            "u_t" => Var::Ut,
            "psi" => Var::Psi,
            "eps" => Var::Eps,
            "F" => Var::F,
            "F'" => Var::Fp,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Const(Num),
    Var(Var),
    Param(String),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Num),
    Exp(Expr),
    Ln(Expr),
}

/// Immutable expression; clones are cheap (shared subtrees).
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound symbol: {0}")]
    Unbound(String),
}

/// Variable/parameter bindings for evaluation.
#[derive(Clone, Debug, Default)]
pub struct Bindings {
    vars: HashMap<Var, f64>,
    params: HashMap<String, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn var(mut self, v: Var, val: f64) -> Self {
        self.vars.insert(v, val);
        self
    }
    pub fn param(mut self, name: &str, val: f64) -> Self {
        self.params.insert(name.to_string(), val);
        self
    }
    pub fn set_var(&mut self, v: Var, val: f64) {
        self.vars.insert(v, val);
    }
    pub fn set_param(&mut self, name: &str, val: f64) {
        self.params.insert(name.to_string(), val);
    }
    pub fn get_var(&self, v: Var) -> Option<f64> {
        self.vars.get(&v).copied()
    }
}

impl Expr {
    fn node(&self) -> &Node {
        &self.0
    }
    fn mk(n: Node) -> Expr {
        Expr(Arc::new(n))
    }

    pub fn num(n: Num) -> Expr {
        Expr::mk(Node::Const(n))
    }
    pub fn int(i: i64) -> Expr {
        Expr::num(Num::from_int(i))
    }
    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::num(Num::Rat(rat(n, d)))
    }
    pub fn real(f: f64) -> Expr {
        Expr::num(Num::F(f))
    }
    pub fn var(v: Var) -> Expr {
        Expr::mk(Node::Var(v))
    }
    pub fn x() -> Expr {
        Expr::var(Var::X)
    }
    pub fn t() -> Expr {
        Expr::var(Var::T)
    }
    pub fn u() -> Expr {
        Expr::var(Var::U)
    }
    pub fn eps() -> Expr {
        Expr::var(Var::Eps)
    }
    pub fn psi() -> Expr {
        Expr::var(Var::Psi)
    }
    pub fn param(name: &str) -> Expr {
        Expr::mk(Node::Param(name.to_string()))
    }
    pub fn zero() -> Expr {
        Expr::int(0)
    }
    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn add_all(terms: Vec<Expr>) -> Expr {
        fold(&Expr::mk(Node::Sum(terms)))
    }
    pub fn mul_all(factors: Vec<Expr>) -> Expr {
        fold(&Expr::mk(Node::Product(factors)))
    }
    pub fn pow(self, exponent: Num) -> Expr {
        fold(&Expr::mk(Node::Power(self, exponent)))
    }
    pub fn powi(self, e: i64) -> Expr {
        self.pow(Num::from_int(e))
    }
    pub fn powr(self, r: Rat) -> Expr {
        self.pow(Num::Rat(r))
    }
    pub fn exp(self) -> Expr {
        fold(&Expr::mk(Node::Exp(self)))
    }
    pub fn ln(self) -> Expr {
        fold(&Expr::mk(Node::Ln(self)))
    }
    pub fn recip(self) -> Expr {
        self.pow(Num::from_int(-1))
    }
    pub fn sqrt(self) -> Expr {
        self.pow(Num::Rat(rat(1, 2)))
    }

    pub fn is_zero_expr(&self) -> bool {
        matches!(self.node(), Node::Const(c) if c.is_zero())
    }
    pub fn as_const(&self) -> Option<Num> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self.node() {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var(w) => *w == v,
            Node::Sum(es) | Node::Product(es) => es.iter().any(|e| e.depends_on(v)),
            Node::Power(b, _) => b.depends_on(v),
            Node::Exp(a) | Node::Ln(a) => a.depends_on(v),
        }
    }

    pub fn params_used(&self, out: &mut Vec<String>) {
        match self.node() {
            Node::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Node::Sum(es) | Node::Product(es) => {
                for e in es {
                    e.params_used(out);
                }
            }
            Node::Power(b, _) => b.params_used(out),
            Node::Exp(a) | Node::Ln(a) => a.params_used(out),
            _ => {}
        }
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add_all(vec![self, rhs])
    }
}
impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::add_all(vec![self, -rhs])
    }
}
impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul_all(vec![self, rhs])
    }
}
impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::mul_all(vec![self, rhs.recip()])
    }
}
impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::mul_all(vec![Expr::int(-1), self])
    }
}

/// Exact partial derivative with respect to `v`; parameters are constants.
pub fn differentiate(e: &Expr, v: Var) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => Expr::zero(),
        Node::Var(w) => {
            if *w == v {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Sum(es) => Expr::add_all(es.iter().map(|t| differentiate(t, v)).collect()),
        Node::Product(es) => {
            let mut terms = Vec::new();
            for (i, _) in es.iter().enumerate() {
                let mut fs: Vec<Expr> = es.clone();
                fs[i] = differentiate(&es[i], v);
                terms.push(Expr::mul_all(fs));
            }
            Expr::add_all(terms)
        }
        Node::Power(b, r) => {
            // d(b^r) = r * b^(r-1) * db
            let db = differentiate(b, v);
            Expr::mul_all(vec![
                Expr::num(*r),
                b.clone().pow(r.add(Num::from_int(-1))),
                db,
            ])
        }
        Node::Exp(a) => Expr::mul_all(vec![e.clone(), differentiate(a, v)]),
        Node::Ln(a) => Expr::mul_all(vec![differentiate(a, v), a.clone().recip()]),
    }
}

/// Constant folding: collapses constant subtrees and applies 0/1 identities.
/// Evaluation semantics are preserved at every valid binding.
pub fn fold(e: &Expr) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Var(_) | Node::Param(_) => e.clone(),
        Node::Sum(es) => {
            let mut acc = Num::zero();
            let mut rest: Vec<Expr> = Vec::new();
            for t in es {
                let f = fold(t);
                match f.node() {
                    Node::Const(c) => acc = acc.add(*c),
                    Node::Sum(inner) => {
                        for i in inner {
                            match i.node() {
                                Node::Const(c) => acc = acc.add(*c),
                                _ => rest.push(i.clone()),
                            }
                        }
                    }
                    _ => rest.push(f),
                }
            }
            if !acc.is_zero() || rest.is_empty() {
                rest.insert(0, Expr::num(acc));
            }
            if rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                Expr::mk(Node::Sum(rest))
            }
        }
        Node::Product(es) => {
            let mut acc = Num::one();
            let mut rest: Vec<Expr> = Vec::new();
            for t in es {
                let f = fold(t);
                match f.node() {
                    Node::Const(c) => acc = acc.mul(*c),
                    Node::Product(inner) => {
                        for i in inner {
                            match i.node() {
                                Node::Const(c) => acc = acc.mul(*c),
                                _ => rest.push(i.clone()),
                            }
                        }
                    }
                    _ => rest.push(f),
                }
            }
            if acc.is_zero() {
                return Expr::num(Num::zero());
            }
            if !acc.is_one() || rest.is_empty() {
                rest.insert(0, Expr::num(acc));
            }
            if rest.len() == 1 {
                rest.pop().unwrap()
            } else {
                Expr::mk(Node::Product(rest))
            }
        }
        Node::Power(b, r) => {
            let fb = fold(b);
            if r.is_zero() {
                return Expr::one();
            }
            if r.is_one() {
                return fb;
            }
            match fb.node() {
                Node::Const(c) => {
                    if let Some(p) = c.pow_exact(*r) {
                        return Expr::num(p);
                    }
                    let base = c.to_f64();
                    if base > 0.0 {
                        return Expr::real(base.powf(r.to_f64()));
                    }
                    Expr::mk(Node::Power(fb, *r))
                }
                // (b^r1)^r2 -> b^(r1*r2): valid on our positive-base domain
                Node::Power(b2, r2) => fold(&Expr::mk(Node::Power(b2.clone(), r2.mul(*r)))),
                // (exp a)^r -> exp(r*a)
                Node::Exp(a) => fold(&Expr::mk(Node::Exp(Expr::mul_all(vec![
                    Expr::num(*r),
                    a.clone(),
                ])))),
                _ => Expr::mk(Node::Power(fb, *r)),
            }
        }
        Node::Exp(a) => {
            let fa = fold(a);
            match fa.node() {
                Node::Const(c) => {
                    if c.is_zero() {
                        Expr::one()
                    } else {
                        Expr::real(c.to_f64().exp())
                    }
                }
                Node::Ln(inner) => inner.clone(),
                _ => Expr::mk(Node::Exp(fa)),
            }
        }
        Node::Ln(a) => {
            let fa = fold(a);
            match fa.node() {
                Node::Const(c) => {
                    if c.is_one() {
                        Expr::zero()
                    } else if c.to_f64() > 0.0 {
                        Expr::real(c.to_f64().ln())
                    } else {
                        Expr::mk(Node::Ln(fa))
                    }
                }
                Node::Exp(inner) => inner.clone(),
                _ => Expr::mk(Node::Ln(fa)),
            }
        }
    }
}

/// Double-precision evaluation. Fractional powers of non-positive bases and
/// logs of non-positive arguments are domain errors, never NaN.
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    match e.node() {
        Node::Const(c) => Ok(c.to_f64()),
        Node::Var(v) => b
            .vars
            .get(v)
            .copied()
            .ok_or_else(|| EvalError::Unbound(v.name().to_string())),
        Node::Param(p) => b
            .params
            .get(p)
            .copied()
            .ok_or_else(|| EvalError::Unbound(p.clone())),
        Node::Sum(es) => {
            let mut s = 0.0;
            for t in es {
                s += evaluate(t, b)?;
            }
            Ok(s)
        }
        Node::Product(es) => {
            let mut p = 1.0;
            for t in es {
                p *= evaluate(t, b)?;
            }
            Ok(p)
        }
        Node::Power(base, r) => {
            let bb = evaluate(base, b)?;
            if let Some(i) = r.as_integer() {
                if bb == 0.0 && i < 0 {
                    return Err(EvalError::Domain("0 raised to negative power".into()));
                }
                return Ok(bb.powi(i as i32));
            }
            if bb == 0.0 && r.to_f64() > 0.0 {
                return Ok(0.0);
            }
            if bb <= 0.0 {
                return Err(EvalError::Domain(format!(
                    "fractional power of non-positive base {bb}"
                )));
            }
            Ok(bb.powf(r.to_f64()))
        }
        Node::Exp(a) => Ok(evaluate(a, b)?.exp()),
        Node::Ln(a) => {
            let v = evaluate(a, b)?;
            if v <= 0.0 {
                return Err(EvalError::Domain(format!("ln of non-positive value {v}")));
            }
            Ok(v.ln())
        }
    }
}

/// Capture-free substitution of one variable, followed by folding.
pub fn substitute(e: &Expr, v: Var, replacement: &Expr) -> Expr {
    fold(&subst_raw(e, &[(v, replacement.clone())]))
}

/// Simultaneous substitution of several variables (all replacements refer to
/// the *original* variables), followed by folding.
pub fn substitute_all(e: &Expr, subs: &[(Var, Expr)]) -> Expr {
    fold(&subst_raw(e, subs))
}

fn subst_raw(e: &Expr, subs: &[(Var, Expr)]) -> Expr {
    match e.node() {
        Node::Const(_) | Node::Param(_) => e.clone(),
        Node::Var(w) => subs
            .iter()
            .find(|(v, _)| v == w)
            .map(|(_, r)| r.clone())
            .unwrap_or_else(|| e.clone()),
        Node::Sum(es) => Expr::mk(Node::Sum(es.iter().map(|t| subst_raw(t, subs)).collect())),
        Node::Product(es) => Expr::mk(Node::Product(
            es.iter().map(|t| subst_raw(t, subs)).collect(),
        )),
        Node::Power(b, r) => Expr::mk(Node::Power(subst_raw(b, subs), *r)),
        Node::Exp(a) => Expr::mk(Node::Exp(subst_raw(a, subs))),
        Node::Ln(a) => Expr::mk(Node::Ln(subst_raw(a, subs))),
    }
}

/// Substitute a named parameter by an expression.
pub fn substitute_param(e: &Expr, name: &str, replacement: &Expr) -> Expr {
    fn go(e: &Expr, name: &str, r: &Expr) -> Expr {
        match e.node() {
            Node::Param(p) if p == name => r.clone(),
            Node::Const(_) | Node::Var(_) | Node::Param(_) => e.clone(),
            Node::Sum(es) => Expr::mk(Node::Sum(es.iter().map(|t| go(t, name, r)).collect())),
            Node::Product(es) => {
                Expr::mk(Node::Product(es.iter().map(|t| go(t, name, r)).collect()))
            }
            Node::Power(b, k) => Expr::mk(Node::Power(go(b, name, r), *k)),
            Node::Exp(a) => Expr::mk(Node::Exp(go(a, name, r))),
            Node::Ln(a) => Expr::mk(Node::Ln(go(a, name, r))),
        }
    }
    fold(&go(e, name, replacement))
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rat(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Num::F(v) => write!(f, "{v:?}"),
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized infix form; round-trips through `parse`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => {
                if matches!(c, Num::Rat(r) if !r.is_integer()) || c.to_f64() < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Node::Var(v) => write!(f, "{}", v.name()),
            Node::Param(p) => write!(f, "{p}"),
            Node::Sum(es) => {
                write!(f, "(")?;
                for (i, t) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Node::Product(es) => {
                write!(f, "(")?;
                for (i, t) in es.iter().enumerate() {
                    if i > 0 {
                        write!(f, " * ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Node::Power(b, r) => write!(f, "({b} ^ {r})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Error, Debug, Clone, PartialEq)]
#[error("parse error at byte {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

/// Parser for the plain-text serialization (used by the CLI only).
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError {
            pos: p.pos,
            msg: "trailing input".into(),
        });
    }
    Ok(fold(&e))
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }
    fn err(&self, msg: &str) -> ParseError {
        ParseError {
            pos: self.pos,
            msg: msg.into(),
        }
    }
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    terms.push(self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::add_all(terms))
    }
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        while let Some(c) = self.peek() {
            match c {
                b'*' => {
                    self.pos += 1;
                    acc = acc * self.factor()?;
                }
                b'/' => {
                    self.pos += 1;
                    acc = acc / self.factor()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.factor()?;
            return match fold(&e).as_const() {
                Some(n) => Ok(base.pow(n)),
                // a^b with symbolic b: encode as exp(b*ln(a))
                None => Ok((e * base.ln()).exp()),
            };
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            _ => Err(self.err("expected atom")),
        }
    }
    fn number(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let mut saw_dot = false;
        let mut saw_exp = false;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == b'.' && !saw_dot && !saw_exp {
                saw_dot = true;
                self.pos += 1;
            } else if (c == b'e' || c == b'E')
                && !saw_exp
                && self.pos + 1 < self.src.len()
                && (self.src[self.pos + 1].is_ascii_digit()
                    || self.src[self.pos + 1] == b'-'
                    || self.src[self.pos + 1] == b'+')
            {
                saw_exp = true;
                self.pos += 2;
            } else {
                break;
            }
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if saw_dot || saw_exp {
            s.parse::<f64>()
                .map(Expr::real)
                .map_err(|e| self.err(&e.to_string()))
        } else {
            s.parse::<i64>()
                .map(Expr::int)
                .map_err(|e| self.err(&e.to_string()))
        }
    }
    fn ident(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let arg = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.err("expected ')'"));
            }
            self.pos += 1;
            return match name.as_str() {
                "exp" => Ok(arg.exp()),
                "ln" => Ok(arg.ln()),
                "sqrt" => Ok(arg.sqrt()),
                _ => Err(self.err(&format!("unknown function '{name}'"))),
            };
        }
        if let Some(v) = Var::from_name(&name) {
            return Ok(Expr::var(v));
        }
        Ok(Expr::param(&name))
    }
}

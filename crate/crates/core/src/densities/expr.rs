//! A small arithmetic language for user densities and closed-form fields.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, `pi`,
//! functions `abs sqrt exp log sin cos norm dot`, named parameters, and
//! the variables below (indices are 1-based single digits):
//!
//! | tensor | entries      | meaning                          |
//! |--------|--------------|----------------------------------|
//! | `x`    | `x1`         | material point                   |
//! | `y`    | `y1`         | coordinate of a sampled field    |
//! | `A`    | `A12`        | first gradient slot (d×N)        |
//! | `M`    | `M112`       | second gradient slot (d×N×N)     |
//! | `lam`  | `lam1`       | jump of the field (d)            |
//! | `Lam`  | `Lam12`      | jump of the gradient (d×N)       |
//! | `nu`   | `nu1`        | unit normal (N)                  |

use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
    Norm,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Slot {
    X,
    Y,
    A,
    M,
    Lam,
    LamMat,
    Nu,
}

/// A whole tensor (`index == None`) or one entry of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub slot: Slot,
    pub index: Option<Vec<usize>>,
}

/// Numbers the evaluator can work with: plain floats, or values carrying a
/// gradient with respect to the field coordinates.
pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powf(&self, e: &Self) -> Self;
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn powf(&self, e: &Self) -> Self {
        if e.fract() == 0.0 && e.abs() < 64.0 {
            self.powi(*e as i32)
        } else {
            f64::powf(*self, *e)
        }
    }
}

/// Forward-mode dual number: value and gradient in the field coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub v: f64,
    pub d: Vec<f64>,
}

impl Dual {
    pub fn variable(v: f64, n: usize, k: usize) -> Self {
        let mut d = vec![0.0; n];
        d[k] = 1.0;
        Dual { v, d }
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let n = self.d.len().max(o.d.len());
        (0..n).map(|i| f(self.d.get(i).copied().unwrap_or(0.0), o.d.get(i).copied().unwrap_or(0.0))).collect()
    }

    fn chain(&self, v: f64, dv: f64) -> Self {
        Dual { v, d: self.d.iter().map(|x| x * dv).collect() }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.zip(&o, |a, b| a + b) }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.zip(&o, |a, b| a - b) }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        let (a, b) = (self.v, o.v);
        Dual { v: a * b, d: self.zip(&o, |x, y| x * b + a * y) }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let (a, b) = (self.v, o.v);
        Dual { v: a / b, d: self.zip(&o, |x, y| (x * b - a * y) / (b * b)) }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: self.d.iter().map(|x| -x).collect() }
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual { v, d: Vec::new() }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn abs(&self) -> Self {
        self.chain(self.v.abs(), if self.v < 0.0 { -1.0 } else { 1.0 })
    }
    fn sqrt(&self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, if s > 0.0 { 0.5 / s } else { 0.0 })
    }
    fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(&self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn sin(&self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn powf(&self, e: &Self) -> Self {
        if e.d.iter().all(|x| *x == 0.0) {
            let p = Scalar::powf(&self.v, &e.v);
            let dp = if e.v == 0.0 { 0.0 } else { e.v * Scalar::powf(&self.v, &(e.v - 1.0)) };
            self.chain(p, dp)
        } else {
            (self.ln() * e.clone()).exp()
        }
    }
}

/// Values bound to the variables of an expression.
#[derive(Debug, Clone)]
pub struct Bindings<'a, S> {
    pub d: usize,
    pub n: usize,
    pub slots: BTreeMap<Slot, &'a [S]>,
    pub params: &'a BTreeMap<String, f64>,
}

impl<'a, S> Bindings<'a, S> {
    pub fn new(d: usize, n: usize, params: &'a BTreeMap<String, f64>) -> Self {
        Bindings { d, n, slots: BTreeMap::new(), params }
    }

    pub fn bind(mut self, slot: Slot, values: &'a [S]) -> Self {
        self.slots.insert(slot, values);
        self
    }
}

enum Value<S> {
    Scalar(S),
    Tensor(Vec<S>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.sum()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Expression(format!("unexpected trailing input in `{src}`")));
        }
        Ok(e)
    }

    /// Every variable slot the expression reads.
    pub fn slots(&self) -> Vec<Slot> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(&v.slot) {
                    out.push(v.slot);
                }
            }
        });
        out
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) => e.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    /// Evaluates to a scalar.
    pub fn eval<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<S> {
        match self.value(b)? {
            Value::Scalar(s) => Ok(s),
            Value::Tensor(_) => Err(Error::Expression("expression evaluates to a tensor; wrap it in norm()".into())),
        }
    }

    fn value<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<Value<S>> {
        Ok(match self {
            Expr::Num(v) => Value::Scalar(S::constant(*v)),
            Expr::Param(p) => Value::Scalar(S::constant(
                *b.params.get(p).ok_or_else(|| Error::Expression(format!("unknown parameter `{p}`")))?,
            )),
            Expr::Var(v) => {
                let data = b
                    .slots
                    .get(&v.slot)
                    .ok_or_else(|| Error::Expression(format!("variable {:?} is not available here", v.slot)))?;
                match &v.index {
                    None => Value::Tensor(data.to_vec()),
                    Some(idx) => {
                        let dims = slot_dims(v.slot, b.d, b.n);
                        if idx.len() != dims.len() || idx.iter().zip(&dims).any(|(i, m)| *i == 0 || i > m) {
                            return Err(Error::Expression(format!("index {idx:?} out of range for {:?}", v.slot)));
                        }
                        let flat = idx.iter().zip(&dims).fold(0, |acc, (i, m)| acc * m + (i - 1));
                        Value::Scalar(data[flat].clone())
                    }
                }
            }
            Expr::Neg(e) => match e.value(b)? {
                Value::Scalar(s) => Value::Scalar(-s),
                Value::Tensor(t) => Value::Tensor(t.into_iter().map(|v| -v).collect()),
            },
            Expr::Bin(op, l, r) => binary(*op, l.value(b)?, r.value(b)?)?,
            Expr::Call(f, args) => {
                let vals = args.iter().map(|a| a.value(b)).collect::<Result<Vec<_>>>()?;
                call(*f, vals)?
            }
        })
    }
}

fn slot_dims(slot: Slot, d: usize, n: usize) -> Vec<usize> {
    match slot {
        Slot::X | Slot::Y | Slot::Nu => vec![n],
        Slot::Lam => vec![d],
        Slot::A | Slot::LamMat => vec![d, n],
        Slot::M => vec![d, n, n],
    }
}

fn binary<S: Scalar>(op: Op, l: Value<S>, r: Value<S>) -> Result<Value<S>> {
    let apply = |a: S, b: S| match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => a / b,
        Op::Pow => a.powf(&b),
    };
    Ok(match (l, r) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(apply(a, b)),
        (Value::Tensor(t), Value::Scalar(s)) if matches!(op, Op::Mul | Op::Div) => {
            Value::Tensor(t.into_iter().map(|v| apply(v, s.clone())).collect())
        }
        (Value::Scalar(s), Value::Tensor(t)) if op == Op::Mul => {
            Value::Tensor(t.into_iter().map(|v| s.clone() * v).collect())
        }
        (Value::Tensor(a), Value::Tensor(b)) if matches!(op, Op::Add | Op::Sub) && a.len() == b.len() => {
            Value::Tensor(a.into_iter().zip(b).map(|(x, y)| apply(x, y)).collect())
        }
        _ => return Err(Error::Expression(format!("operator {op:?} not defined for these operand shapes"))),
    })
}

fn call<S: Scalar>(f: Func, mut args: Vec<Value<S>>) -> Result<Value<S>> {
    let arity = if f == Func::Dot { 2 } else { 1 };
    if args.len() != arity {
        return Err(Error::Expression(format!("{f:?} takes {arity} argument(s)")));
    }
    let scalar = |v: Value<S>| match v {
        Value::Scalar(s) => Ok(s),
        Value::Tensor(_) => Err(Error::Expression(format!("{f:?} expects a scalar argument"))),
    };
    let tensor = |v: Value<S>| match v {
        Value::Tensor(t) => t,
        Value::Scalar(s) => vec![s],
    };
    Ok(Value::Scalar(match f {
        Func::Abs => scalar(args.remove(0))?.abs(),
        Func::Sqrt => scalar(args.remove(0))?.sqrt(),
        Func::Exp => scalar(args.remove(0))?.exp(),
        Func::Log => scalar(args.remove(0))?.ln(),
        Func::Sin => scalar(args.remove(0))?.sin(),
        Func::Cos => scalar(args.remove(0))?.cos(),
        Func::Norm => {
            let t = tensor(args.remove(0));
            t.into_iter().fold(S::constant(0.0), |acc, v| acc + v.clone() * v).sqrt()
        }
        Func::Dot => {
            let b = tensor(args.remove(1));
            let a = tensor(args.remove(0));
            if a.len() != b.len() {
                return Err(Error::Expression("dot of tensors with different sizes".into()));
            }
            a.into_iter().zip(b).fold(S::constant(0.0), |acc, (x, y)| acc + x * y)
        }
    }))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Tok::Num(s.parse().map_err(|_| Error::Expression(format!("bad number `{s}`")))?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Sym(c));
            i += 1;
        } else {
            return Err(Error::Expression(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek_sym(&self, c: char) -> bool {
        self.tokens.get(self.pos) == Some(&Tok::Sym(c))
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Expression(format!("expected `{c}`")))
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = if self.peek_sym('+') {
                Op::Add
            } else if self.peek_sym('-') {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.product()?));
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.peek_sym('*') {
                Op::Mul
            } else if self.peek_sym('/') {
                Op::Div
            } else {
                return Ok(lhs);
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_sym('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.peek_sym('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek_sym('^') {
            self.pos += 1;
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.tokens.get(self.pos).cloned().ok_or_else(|| Error::Expression("unexpected end".into()))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek_sym('(') {
                    self.pos += 1;
                    let func = function(&name)?;
                    let mut args = vec![self.sum()?];
                    while self.peek_sym(',') {
                        self.pos += 1;
                        args.push(self.sum()?);
                    }
                    self.expect(')')?;
                    return Ok(Expr::Call(func, args));
                }
                if name == "pi" {
                    return Ok(Expr::Num(std::f64::consts::PI));
                }
                Ok(variable(&name).map(Expr::Var).unwrap_or(Expr::Param(name)))
            }
            Tok::Sym(c) => Err(Error::Expression(format!("unexpected `{c}`"))),
        }
    }
}

fn function(name: &str) -> Result<Func> {
    Ok(match name {
        "abs" => Func::Abs,
        "sqrt" => Func::Sqrt,
        "exp" => Func::Exp,
        "log" => Func::Log,
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        "norm" => Func::Norm,
        "dot" => Func::Dot,
        _ => return Err(Error::Expression(format!("unknown function `{name}`"))),
    })
}

fn variable(name: &str) -> Option<Var> {
    // longest prefixes first so `Lam` is not read as `L`
    const PREFIXES: [(&str, Slot, usize); 7] = [
        ("Lam", Slot::LamMat, 2),
        ("lam", Slot::Lam, 1),
        ("nu", Slot::Nu, 1),
        ("x", Slot::X, 1),
        ("y", Slot::Y, 1),
        ("A", Slot::A, 2),
        ("M", Slot::M, 3),
    ];
    for (prefix, slot, order) in PREFIXES {
        if let Some(rest) = name.strip_prefix(prefix) {
            if rest.is_empty() {
                return Some(Var { slot, index: None });
            }
            if rest.len() == order && rest.chars().all(|c| c.is_ascii_digit() && c != '0') {
                let index = rest.chars().map(|c| c.to_digit(10).unwrap() as usize).collect();
                return Some(Var { slot, index: Some(index) });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_scalar(src: &str, lam: &[f64]) -> f64 {
        let params = BTreeMap::new();
        let b = Bindings::new(lam.len(), 2, &params).bind(Slot::Lam, lam);
        Expr::parse(src).unwrap().eval(&b).unwrap()
    }

    #[test]
    fn arithmetic_and_precedence() {
        assert_eq!(eval_scalar("1 + 2 * 3", &[]), 7.0);
        assert_eq!(eval_scalar("-2^2", &[]), -4.0);
        assert_eq!(eval_scalar("2^3^2", &[]), 512.0);
        assert_eq!(eval_scalar("(1 + 2) / 4", &[]), 0.75);
        assert!((eval_scalar("1.5e-1 * 2", &[]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn tensor_functions() {
        assert_eq!(eval_scalar("norm(lam)", &[3.0, 4.0]), 5.0);
        assert_eq!(eval_scalar("norm(lam)^2", &[3.0, 4.0]), 25.0);
        assert_eq!(eval_scalar("dot(lam, lam) + lam2", &[3.0, 4.0]), 29.0);
        assert_eq!(eval_scalar("norm(2 * lam)", &[3.0, 4.0]), 10.0);
    }

    #[test]
    fn indexed_entries() {
        let params = BTreeMap::from([("k".to_string(), 2.0)]);
        let a = [1.0, 2.0, 3.0, 4.0];
        let m: Vec<f64> = (0..8).map(|v| v as f64).collect();
        let b = Bindings::new(2, 2, &params).bind(Slot::A, &a).bind(Slot::M, &m);
        assert_eq!(Expr::parse("A21 + k * M212").unwrap().eval(&b).unwrap(), 3.0 + 2.0 * 5.0);
        assert!(Expr::parse("A31").unwrap().eval(&b).is_err());
        assert!(Expr::parse("nu1").unwrap().eval(&b).is_err());
        assert!(Expr::parse("q").unwrap().eval(&b).is_err());
    }

    #[test]
    fn dual_numbers_differentiate() {
        let params = BTreeMap::new();
        let y = [Dual::variable(0.3, 2, 0), Dual::variable(0.5, 2, 1)];
        let b = Bindings::new(1, 2, &params).bind(Slot::Y, &y);
        let v = Expr::parse("y1^2 / 2 + sin(y2) * y1").unwrap().eval(&b).unwrap();
        assert!((v.v - (0.045 + 0.5f64.sin() * 0.3)).abs() < 1e-15);
        assert!((v.d[0] - (0.3 + 0.5f64.sin())).abs() < 1e-15);
        assert!((v.d[1] - 0.5f64.cos() * 0.3).abs() < 1e-15);
    }

    #[test]
    fn parse_errors() {
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("1 $ 2").is_err());
    }
}

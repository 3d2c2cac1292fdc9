//! Expression language for scalar functions, with symbolic partials.
//!
//! Grammar: variables `x`, `y`, `z`; numeric literals; constants `pi`, `e`;
//! binary `+ - * /`; `^` with a nonnegative integer literal exponent; unary
//! minus; calls `exp sin cos sqrt inv`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::{Complex64, ComplexFloat};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::function::{FunctionBody, Interval, Polynomial, Rectangle, ScalarFunction};

/// Highest partial order tabulated for parsed expressions.
pub const MAX_SYMBOLIC_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Inv,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Inv => "inv",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "exp" => Func::Exp,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "inv" => Func::Inv,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

use Expr::*;

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Const(c) if *c == v)
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Const(c) => Const(-c),
        Neg(inner) => *inner,
        other => Neg(Box::new(other)),
    }
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x + y),
        (a, b) if is_const(&a, 0.0) => b,
        (a, b) if is_const(&b, 0.0) => a,
        (a, Neg(b)) => sub(a, *b),
        (a, b) => Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x - y),
        (a, b) if is_const(&b, 0.0) => a,
        (a, b) if is_const(&a, 0.0) => neg(b),
        (a, Neg(b)) => add(a, *b),
        (a, b) => Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) => Const(x * y),
        (a, b) if is_const(&a, 0.0) || is_const(&b, 0.0) => Const(0.0),
        (a, b) if is_const(&a, 1.0) => b,
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) if is_const(&a, -1.0) => neg(b),
        (a, b) if is_const(&b, -1.0) => neg(a),
        (Neg(a), b) => neg(mul(*a, b)),
        (a, Neg(b)) => neg(mul(a, *b)),
        (a, Const(c)) => Mul(Box::new(Const(c)), Box::new(a)),
        (a, b) => Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (Const(x), Const(y)) if y != 0.0 => Const(x / y),
        (a, _) if is_const(&a, 0.0) => Const(0.0),
        (a, b) if is_const(&b, 1.0) => a,
        (a, b) => Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, k: u32) -> Expr {
    match (a, k) {
        (_, 0) => Const(1.0),
        (a, 1) => a,
        (Const(c), k) => Const(c.powi(k as i32)),
        (Pow(a, j), k) => Pow(a, j * k),
        (a, k) => Pow(Box::new(a), k),
    }
}

pub fn call(f: Func, a: Expr) -> Expr {
    match (f, &a) {
        (Func::Exp, Const(c)) => Const(c.exp()),
        (Func::Sin, Const(c)) => Const(c.sin()),
        (Func::Cos, Const(c)) => Const(c.cos()),
        _ => Call(f, Box::new(a)),
    }
}

impl Expr {
    /// Symbolic partial derivative in variable `v`.
    pub fn diff(&self, v: usize) -> Expr {
        match self {
            Const(_) => Const(0.0),
            Var(k) => Const(if *k == v { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(v)),
            Add(a, b) => add(a.diff(v), b.diff(v)),
            Sub(a, b) => sub(a.diff(v), b.diff(v)),
            Mul(a, b) => add(mul(a.diff(v), (**b).clone()), mul((**a).clone(), b.diff(v))),
            Div(a, b) => sub(
                div(a.diff(v), (**b).clone()),
                div(mul((**a).clone(), b.diff(v)), pow((**b).clone(), 2)),
            ),
            Pow(a, k) => mul(mul(Const(*k as f64), pow((**a).clone(), k - 1)), a.diff(v)),
            Call(f, a) => {
                let inner = a.diff(v);
                if is_const(&inner, 0.0) {
                    return Const(0.0);
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => call(Func::Exp, a),
                    Func::Sin => call(Func::Cos, a),
                    Func::Cos => neg(call(Func::Sin, a)),
                    Func::Sqrt => mul(Const(0.5), call(Func::Inv, call(Func::Sqrt, a))),
                    Func::Inv => neg(pow(call(Func::Inv, a), 2)),
                };
                mul(outer, inner)
            }
        }
    }

    pub fn eval<T>(&self, x: &[T]) -> T
    where
        T: ComplexFloat + From<f64>,
    {
        match self {
            Const(c) => <T as From<f64>>::from(*c),
            Var(k) => x[*k],
            Neg(a) => -a.eval(x),
            Add(a, b) => a.eval(x) + b.eval(x),
            Sub(a, b) => a.eval(x) - b.eval(x),
            Mul(a, b) => a.eval(x) * b.eval(x),
            Div(a, b) => a.eval(x) / b.eval(x),
            Pow(a, k) => a.eval(x).powi(*k as i32),
            Call(f, a) => {
                let v = a.eval(x);
                match f {
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Sqrt => v.sqrt(),
                    Func::Inv => v.recip(),
                }
            }
        }
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Const(_) => None,
            Var(k) => Some(*k),
            Neg(a) | Pow(a, _) | Call(_, a) => a.max_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => match (a.max_var(), b.max_var()) {
                (Some(p), Some(q)) => Some(p.max(q)),
                (p, q) => p.or(q),
            },
        }
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Const(_) => {}
            Var(k) => out.push(*k),
            Neg(a) | Pow(a, _) | Call(_, a) => a.collect_vars(out),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Variables appearing inside `sqrt`, `inv` or a denominator.
    pub fn singular_vars(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.walk_singular(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn walk_singular(&self, out: &mut Vec<usize>) {
        match self {
            Const(_) | Var(_) => {}
            Neg(a) | Pow(a, _) => a.walk_singular(out),
            Call(f, a) => {
                if matches!(f, Func::Sqrt | Func::Inv) {
                    a.collect_vars(out);
                }
                a.walk_singular(out);
            }
            Div(a, b) => {
                b.collect_vars(out);
                a.walk_singular(out);
                b.walk_singular(out);
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) => {
                a.walk_singular(out);
                b.walk_singular(out);
            }
        }
    }

    /// The expression as a polynomial, if it uses only polynomial operations.
    pub fn to_polynomial(&self, arity: usize) -> Option<Polynomial> {
        Some(match self {
            Const(c) => Polynomial::from_terms(arity, [(vec![0; arity], *c)]),
            Var(k) => {
                let mut e = vec![0; arity];
                *e.get_mut(*k)? = 1;
                Polynomial::from_terms(arity, [(e, 1.0)])
            }
            Neg(a) => a.to_polynomial(arity)?.scale(-1.0),
            Add(a, b) => a.to_polynomial(arity)?.add(&b.to_polynomial(arity)?),
            Sub(a, b) => a.to_polynomial(arity)?.add(&b.to_polynomial(arity)?.scale(-1.0)),
            Mul(a, b) => a.to_polynomial(arity)?.mul(&b.to_polynomial(arity)?),
            Div(a, b) => match **b {
                Const(c) if c != 0.0 => a.to_polynomial(arity)?.scale(1.0 / c),
                _ => return None,
            },
            Pow(a, k) => {
                let base = a.to_polynomial(arity)?;
                let mut acc = Polynomial::from_terms(arity, [(vec![0; arity], 1.0)]);
                for _ in 0..*k {
                    acc = acc.mul(&base);
                }
                acc
            }
            Call(..) => return None,
        })
    }
}

const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(c) => write!(f, "{c}"),
            Var(k) => match VAR_NAMES.get(*k) {
                Some(n) => f.write_str(n),
                None => write!(f, "x{}", k + 1),
            },
            Neg(a) => write!(f, "(-{a})"),
            Add(a, b) => write!(f, "({a} + {b})"),
            Sub(a, b) => write!(f, "({a} - {b})"),
            Mul(a, b) => write!(f, "{a}*{b}"),
            Div(a, b) => write!(f, "{a}/({b})"),
            Pow(a, k) => write!(f, "({a})^{k}"),
            Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = text.chars().collect();
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
            let v = s
                .parse::<f64>()
                .map_err(|_| Error::Parse { position: start, message: format!("bad number '{s}'") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(Error::Parse { position: i, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position: self.here(), message: message.into() })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 && *v >= 0.0 && *v <= 64.0 => {
                let k = *v as u32;
                self.pos += 1;
                if self.peek() == Some(&Tok::Sym('^')) {
                    return self.err("chained '^' is not supported; use parentheses");
                }
                Ok(Pow(Box::new(base), k))
            }
            _ => self.err("exponent must be a nonnegative integer literal"),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let start = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Const(v))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if let Some(f) = Func::from_name(&name) {
                    if !self.eat('(') {
                        return self.err(format!("expected '(' after {name}"));
                    }
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    return Ok(Call(f, Box::new(arg)));
                }
                match name.as_str() {
                    "x" | "x1" => Ok(Var(0)),
                    "y" | "x2" => Ok(Var(1)),
                    "z" | "x3" => Ok(Var(2)),
                    "pi" => Ok(Const(std::f64::consts::PI)),
                    "e" => Ok(Const(std::f64::consts::E)),
                    _ => Err(Error::Parse { position: start, message: format!("unknown identifier '{name}'") }),
                }
            }
            Some(Tok::Sym(c)) => self.err(format!("unexpected '{c}'")),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0, end: text.chars().count() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Multi-indices of `arity` variables with total order at most `m`.
pub fn multi_indices(arity: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; arity]];
    let mut frontier = out.clone();
    for _ in 0..m {
        let mut next = Vec::new();
        for a in &frontier {
            // Only raise variables at or after the last nonzero one, so each index appears once.
            let last = a.iter().rposition(|&k| k > 0).unwrap_or(0);
            for r in last..arity {
                let mut b = a.clone();
                b[r] += 1;
                next.push(b);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[derive(Debug)]
struct ExprBody {
    partials: HashMap<Vec<u32>, Expr>,
}

impl FunctionBody for ExprBody {
    fn partial(&self, alpha: &[u32], x: &[f64]) -> f64 {
        match self.partials.get(alpha) {
            Some(e) => e.eval(x),
            None => f64::NAN,
        }
    }

    fn complex_value(&self, z: &[Complex64]) -> Option<Complex64> {
        let zero = vec![0; z.len()];
        self.partials.get(&zero).map(|e| e.eval(z))
    }

    fn is_analytic(&self) -> bool {
        true
    }
}

fn tabulate(e: &Expr, arity: usize, m: u32) -> HashMap<Vec<u32>, Expr> {
    let mut table = HashMap::new();
    for alpha in multi_indices(arity, m) {
        let expr = match alpha.iter().position(|&k| k > 0) {
            None => e.clone(),
            Some(r) => {
                let mut prev = alpha.clone();
                prev[r] -= 1;
                let base: &Expr = &table[&prev];
                base.diff(r)
            }
        };
        table.insert(alpha, expr);
    }
    table
}

/// Compares every tabulated partial against a central difference of the next lower one.
fn self_test(table: &HashMap<Vec<u32>, Expr>, domain: &Rectangle, m: u32) -> Result<()> {
    let arity = domain.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..20 {
        let x: Vec<f64> = domain
            .0
            .iter()
            .map(|iv| {
                let (a, b) = iv.sample_box();
                rng.random_range(a..=b)
            })
            .collect();
        for alpha in multi_indices(arity, m) {
            let Some(r) = alpha.iter().position(|&k| k > 0) else { continue };
            let mut prev = alpha.clone();
            prev[r] -= 1;
            let h = 1e-5 * (1.0 + x[r].abs());
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[r] += h;
            xm[r] -= h;
            let fd = (table[&prev].eval(&xp) - table[&prev].eval(&xm)) / (2.0 * h);
            let sym: f64 = table[&alpha].eval(&x);
            let scale = 1.0 + sym.abs() + table[&prev].eval(&x).abs();
            if !((sym - fd).abs() <= 1e-6 * scale) {
                return Err(Error::InvalidInput(format!(
                    "derivative self-test failed for partial {alpha:?} at {x:?}: symbolic {sym}, difference {fd}"
                )));
            }
        }
    }
    Ok(())
}

/// Parses `text` as a function of `arity` variables.
///
/// `domains[r]` overrides the domain of variable `r`; undeclared variables that
/// appear under `sqrt`, `inv` or a denominator default to `(0, inf)`, others to
/// the real line.
pub fn parse_function(text: &str, arity: usize, domains: &[Option<Interval>]) -> Result<ScalarFunction> {
    let e = parse_expr(text)?;
    if let Some(k) = e.max_var() {
        if k >= arity {
            return Err(Error::DimensionMismatch(format!(
                "expression uses variable {} but the function has {} variable(s)",
                k + 1,
                arity
            )));
        }
    }
    let singular = e.singular_vars();
    let domain = Rectangle(
        (0..arity)
            .map(|r| match domains.get(r).copied().flatten() {
                Some(iv) => iv,
                None if singular.contains(&r) => Interval::positive(),
                None => Interval::real_line(),
            })
            .collect(),
    );
    if let Some(p) = e.to_polynomial(arity) {
        let f = ScalarFunction::new(domain, u32::MAX, Arc::new(p), text.trim());
        return Ok(f);
    }
    let table = tabulate(&e, arity, MAX_SYMBOLIC_ORDER);
    self_test(&table, &domain, MAX_SYMBOLIC_ORDER)?;
    Ok(ScalarFunction::new(domain, MAX_SYMBOLIC_ORDER, Arc::new(ExprBody { partials: table }), text.trim()))
}

//! Coefficient expressions over `z₁..zₙ` and their conjugates.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   = term { ("+" | "-") term } ;
//! term   = unary { ("*" | "/") unary } ;
//! unary  = ("-" | "+") unary | power ;
//! power  = atom [ "^" unary ] ;          (* exponent must be constant *)
//! atom   = number | "i" | "pi" | "normsq" | var | call | "(" expr ")" ;
//! var    = "z" digits | "zb" digits ;     (* one-based; zb is the conjugate *)
//! call   = name "(" expr { "," expr } ")" ;
//! name   = "exp" | "conj" | "re" | "im" | "abs2"
//!        | "bump" | "bumpsq" | "dbumpsq" ;
//! ```
//!
//! `bump(r0, r1)` is the smooth radial cutoff `χ(‖z‖)` equal to 1 on
//! `‖z‖ ≤ r0` and 0 on `‖z‖ ≥ r1`; `bump(r0, r1, e)` is `χ(|e|)`.
//! `bumpsq(r0, r1, ρ)` is the same cutoff as a function of a squared radius
//! `ρ` and `dbumpsq` is its derivative in `ρ`.

use std::fmt;

use crate::C64;

use super::FormError;

/// Expression tree. Conjugation is pushed to the leaves at construction, so
/// there is no conjugate node.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(C64),
    Z(usize),
    Zb(usize),
    /// `Σ_k z_k z̄_k`.
    NormSq,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, C64),
    Exp(Box<Expr>),
    /// `φ(ρ) = χ(√ρ)` (`order = 0`) or `φ'(ρ)` (`order = 1`) of `ρ = Re arg`.
    Bump {
        r0: f64,
        r1: f64,
        order: u8,
        arg: Box<Expr>,
    },
}

/// Differentiation variable for Wirtinger derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    Z(usize),
    Zb(usize),
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn constant(c: impl Into<C64>) -> Expr {
        Expr::Const(c.into())
    }

    pub fn as_const(&self) -> Option<C64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(ZERO)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(x), _) if x == ZERO => b,
            (_, Some(y)) if y == ZERO => a,
            _ => match b {
                Expr::Neg(inner) => Expr::Sub(Box::new(a), inner),
                b => Expr::Add(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (Some(x), _) if x == ZERO => Expr::neg(b),
            (_, Some(y)) if y == ZERO => a,
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(x), _) | (_, Some(x)) if x == ZERO => Expr::Const(ZERO),
            (Some(x), _) if x == ONE => b,
            (_, Some(y)) if y == ONE => a,
            (_, Some(_)) => Expr::Mul(Box::new(b), Box::new(a)),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x / y),
            (Some(x), _) if x == ZERO => Expr::Const(ZERO),
            (_, Some(y)) if y == ONE => a,
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, c: C64) -> Expr {
        if c == ZERO {
            return Expr::Const(ONE);
        }
        if c == ONE {
            return a;
        }
        match a.as_const() {
            Some(x) => Expr::Const(pow_value(x, c)),
            None => Expr::Pow(Box::new(a), c),
        }
    }

    pub fn exp(a: Expr) -> Expr {
        match a.as_const() {
            Some(x) => Expr::Const(x.exp()),
            None => Expr::Exp(Box::new(a)),
        }
    }

    pub fn bump_sq(r0: f64, r1: f64, order: u8, arg: Expr) -> Expr {
        match arg.as_const() {
            Some(x) => Expr::Const(C64::new(bump_eval(r0, r1, order, x.re), 0.0)),
            None => Expr::Bump {
                r0,
                r1,
                order,
                arg: Box::new(arg),
            },
        }
    }

    /// Complex conjugate, pushed to the leaves.
    pub fn conj(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Z(k) => Expr::Zb(*k),
            Expr::Zb(k) => Expr::Z(*k),
            Expr::NormSq => Expr::NormSq,
            Expr::Neg(a) => Expr::neg(a.conj()),
            Expr::Add(a, b) => Expr::add(a.conj(), b.conj()),
            Expr::Sub(a, b) => Expr::sub(a.conj(), b.conj()),
            Expr::Mul(a, b) => Expr::mul(a.conj(), b.conj()),
            Expr::Div(a, b) => Expr::div(a.conj(), b.conj()),
            Expr::Pow(a, c) => Expr::pow(a.conj(), c.conj()),
            Expr::Exp(a) => Expr::exp(a.conj()),
            Expr::Bump { r0, r1, order, arg } => Expr::bump_sq(*r0, *r1, *order, arg.conj()),
        }
    }

    /// Wirtinger derivative `∂/∂z_k` or `∂/∂z̄_k`.
    pub fn diff(&self, v: Var) -> Result<Expr, FormError> {
        Ok(match self {
            Expr::Const(_) => Expr::Const(ZERO),
            Expr::Z(k) => Expr::Const(if v == Var::Z(*k) { ONE } else { ZERO }),
            Expr::Zb(k) => Expr::Const(if v == Var::Zb(*k) { ONE } else { ZERO }),
            Expr::NormSq => match v {
                Var::Z(k) => Expr::Zb(k),
                Var::Zb(k) => Expr::Z(k),
            },
            Expr::Neg(a) => Expr::neg(a.diff(v)?),
            Expr::Add(a, b) => Expr::add(a.diff(v)?, b.diff(v)?),
            Expr::Sub(a, b) => Expr::sub(a.diff(v)?, b.diff(v)?),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(v)?, (**b).clone()),
                Expr::mul((**a).clone(), b.diff(v)?),
            ),
            Expr::Div(a, b) => {
                let da = a.diff(v)?;
                let db = b.diff(v)?;
                let first = Expr::div(da, (**b).clone());
                if db.is_zero() {
                    first
                } else {
                    Expr::sub(
                        first,
                        Expr::div(
                            Expr::mul((**a).clone(), db),
                            Expr::pow((**b).clone(), C64::new(2.0, 0.0)),
                        ),
                    )
                }
            }
            Expr::Pow(a, c) => {
                let da = a.diff(v)?;
                if da.is_zero() {
                    Expr::Const(ZERO)
                } else {
                    Expr::mul(Expr::mul(Expr::Const(*c), Expr::pow((**a).clone(), c - 1.0)), da)
                }
            }
            Expr::Exp(a) => Expr::mul(self.clone(), a.diff(v)?),
            Expr::Bump { r0, r1, order, arg } => {
                let da = arg.diff(v)?;
                if da.is_zero() {
                    Expr::Const(ZERO)
                } else if *order == 0 {
                    Expr::mul(Expr::bump_sq(*r0, *r1, 1, (**arg).clone()), da)
                } else {
                    return Err(FormError::UnsupportedDerivative);
                }
            }
        })
    }

    /// Replaces `z_k` by `subs[k]` (and `z̄_k` by its conjugate).
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Z(k) => subs[*k].clone(),
            Expr::Zb(k) => subs[*k].conj(),
            Expr::NormSq => subs
                .iter()
                .map(|s| Expr::mul(s.clone(), s.conj()))
                .fold(Expr::Const(ZERO), Expr::add),
            Expr::Neg(a) => Expr::neg(a.substitute(subs)),
            Expr::Add(a, b) => Expr::add(a.substitute(subs), b.substitute(subs)),
            Expr::Sub(a, b) => Expr::sub(a.substitute(subs), b.substitute(subs)),
            Expr::Mul(a, b) => Expr::mul(a.substitute(subs), b.substitute(subs)),
            Expr::Div(a, b) => Expr::div(a.substitute(subs), b.substitute(subs)),
            Expr::Pow(a, c) => Expr::pow(a.substitute(subs), *c),
            Expr::Exp(a) => Expr::exp(a.substitute(subs)),
            Expr::Bump { r0, r1, order, arg } => Expr::bump_sq(*r0, *r1, *order, arg.substitute(subs)),
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::NormSq => 0,
            Expr::Z(k) | Expr::Zb(k) => k + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) => a.arity(),
            Expr::Bump { arg, .. } => arg.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn uses_norm(&self) -> bool {
        match self {
            Expr::NormSq => true,
            Expr::Const(_) | Expr::Z(_) | Expr::Zb(_) => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) => a.uses_norm(),
            Expr::Bump { arg, .. } => arg.uses_norm(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.uses_norm() || b.uses_norm(),
        }
    }

    /// Direct tree-walking evaluation.
    pub fn eval(&self, z: &[C64]) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Z(k) => z[*k],
            Expr::Zb(k) => z[*k].conj(),
            Expr::NormSq => C64::new(z.iter().map(|v| v.norm_sqr()).sum(), 0.0),
            Expr::Neg(a) => -a.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::Pow(a, c) => pow_value(a.eval(z), *c),
            Expr::Exp(a) => a.eval(z).exp(),
            Expr::Bump { r0, r1, order, arg } => C64::new(bump_eval(*r0, *r1, *order, arg.eval(z).re), 0.0),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(c) if c.im != 0.0 && c.re != 0.0 => 1,
            Expr::Const(c) if c.im != 0.0 => 2,
            Expr::Const(c) if c.re.is_sign_negative() => 3,
            _ => 6,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let wrap = self.precedence() < min;
        if wrap {
            write!(f, "(")?;
        }
        match self {
            Expr::Const(c) => write_const(f, *c)?,
            Expr::Z(k) => write!(f, "z{}", k + 1)?,
            Expr::Zb(k) => write!(f, "zb{}", k + 1)?,
            Expr::NormSq => write!(f, "normsq")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, 3)?;
            }
            Expr::Add(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " + ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Sub(a, b) => {
                a.fmt_prec(f, 1)?;
                write!(f, " - ")?;
                b.fmt_prec(f, 2)?;
            }
            Expr::Mul(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " * ")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Div(a, b) => {
                a.fmt_prec(f, 2)?;
                write!(f, " / ")?;
                b.fmt_prec(f, 3)?;
            }
            Expr::Pow(a, c) => {
                a.fmt_prec(f, 6)?;
                write!(f, "^")?;
                Expr::Const(*c).fmt_prec(f, 6)?;
            }
            Expr::Exp(a) => write!(f, "exp({a})")?,
            Expr::Bump { r0, r1, order, arg } => {
                let name = if *order == 0 { "bumpsq" } else { "dbumpsq" };
                write!(f, "{name}({r0}, {r1}, {arg})")?;
            }
        }
        if wrap {
            write!(f, ")")?;
        }
        Ok(())
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    if c.im == 0.0 {
        if c.re.is_sign_negative() {
            write!(f, "-{}", -c.re)
        } else {
            write!(f, "{}", c.re)
        }
    } else if c.re == 0.0 {
        write!(f, "{}*i", c.im)
    } else {
        write!(f, "{}{:+}*i", c.re, c.im)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// `x^c` with integer fast path; principal branch otherwise.
pub fn pow_value(x: C64, c: C64) -> C64 {
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 2_147_483_647.0 {
        x.powi(c.re as i32)
    } else if x == ZERO {
        if c.re > 0.0 {
            ZERO
        } else {
            C64::new(f64::INFINITY, 0.0)
        }
    } else {
        x.powc(c)
    }
}

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

fn glue_prime(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp() / (x * x)
    }
}

/// Smooth step `ψ`: 0 for `x ≤ 0`, 1 for `x ≥ 1`, `h(x)/(h(x)+h(1−x))` with
/// `h(x) = e^{−1/x}` in between.
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = glue(x);
        a / (a + glue(1.0 - x))
    }
}

pub fn smooth_step_prime(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (glue(x), glue(1.0 - x));
    let d = a + b;
    (glue_prime(x) * b + a * glue_prime(1.0 - x)) / (d * d)
}

/// Radial cutoff `χ(r)`: 1 for `r ≤ r0`, 0 for `r ≥ r1`.
pub fn cutoff(r0: f64, r1: f64, r: f64) -> f64 {
    smooth_step((r1 - r) / (r1 - r0))
}

/// `φ(ρ) = χ(√ρ)` or its derivative `φ'(ρ) = χ'(√ρ) / (2√ρ)`.
pub fn bump_eval(r0: f64, r1: f64, order: u8, rho: f64) -> f64 {
    let r = rho.max(0.0).sqrt();
    if order == 0 {
        return cutoff(r0, r1, r);
    }
    if r <= r0 || r >= r1 || r == 0.0 {
        return 0.0;
    }
    let width = r1 - r0;
    -smooth_step_prime((r1 - r) / width) / (width * 2.0 * r)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    n: usize,
    src: &'a str,
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, FormError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && i + 1 < bytes.len() && bytes[i + 1].is_ascii_digit()) {
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
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text.parse::<f64>().map_err(|_| FormError::Parse {
                pos: start,
                msg: format!("bad number `{text}`"),
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(FormError::Parse {
                pos: i,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.1).unwrap_or(self.src.len())
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, FormError> {
        Err(FormError::Parse {
            pos: self.here(),
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

    fn expect(&mut self, c: char) -> Result<(), FormError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, FormError> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::add(e, self.term()?);
            } else if self.eat('-') {
                e = Expr::sub(e, self.term()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, FormError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::mul(e, self.unary()?);
            } else if self.eat('/') {
                e = Expr::div(e, self.unary()?);
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, FormError> {
        if self.eat('-') {
            Ok(Expr::neg(self.unary()?))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, FormError> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.here();
            let exponent = self.unary()?;
            match exponent.as_const() {
                Some(c) => Ok(Expr::pow(base, c)),
                None => Err(FormError::Parse {
                    pos: at,
                    msg: "exponent must be a constant".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, FormError> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn constant_arg(&self, e: &Expr, what: &str) -> Result<f64, FormError> {
        match e.as_const() {
            Some(c) if c.im == 0.0 && c.re.is_finite() => Ok(c.re),
            _ => self.err(format!("{what} must be a real constant")),
        }
    }

    fn atom(&mut self) -> Result<Expr, FormError> {
        let at = self.here();
        let tok = match self.toks.get(self.pos) {
            Some((t, _)) => t.clone(),
            None => return self.err("unexpected end of input"),
        };
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Const(C64::new(v, 0.0))),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym(c) => Err(FormError::Parse {
                pos: at,
                msg: format!("unexpected `{c}`"),
            }),
            Tok::Ident(name) => self.ident(&name, at),
        }
    }

    fn variable(&self, digits: &str, at: usize) -> Result<usize, FormError> {
        match digits.parse::<usize>() {
            Ok(k) if k >= 1 && k <= self.n => Ok(k - 1),
            _ => Err(FormError::UnknownVariable {
                pos: at,
                name: digits.to_string(),
                n: self.n,
            }),
        }
    }

    fn ident(&mut self, name: &str, at: usize) -> Result<Expr, FormError> {
        match name {
            "i" => return Ok(Expr::Const(C64::new(0.0, 1.0))),
            "pi" => return Ok(Expr::Const(C64::new(std::f64::consts::PI, 0.0))),
            "normsq" => return Ok(Expr::NormSq),
            _ => {}
        }
        if let Some(d) = name.strip_prefix("zb") {
            if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
                return Ok(Expr::Zb(self.variable(d, at)?));
            }
        }
        if let Some(d) = name.strip_prefix('z') {
            if !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()) {
                return Ok(Expr::Z(self.variable(d, at)?));
            }
        }
        let arity = |args: &Vec<Expr>, want: &[usize]| -> Result<(), FormError> {
            if want.contains(&args.len()) {
                Ok(())
            } else {
                Err(FormError::Parse {
                    pos: at,
                    msg: format!("`{name}` takes {want:?} arguments, got {}", args.len()),
                })
            }
        };
        let half = C64::new(0.5, 0.0);
        match name {
            "exp" | "conj" | "re" | "im" | "abs2" => {
                let args = self.args()?;
                arity(&args, &[1])?;
                let a = args.into_iter().next().expect("one argument");
                Ok(match name {
                    "exp" => Expr::exp(a),
                    "conj" => a.conj(),
                    "re" => Expr::mul(Expr::Const(half), Expr::add(a.clone(), a.conj())),
                    "im" => Expr::mul(Expr::Const(C64::new(0.0, -0.5)), Expr::sub(a.clone(), a.conj())),
                    _ => Expr::mul(a.clone(), a.conj()),
                })
            }
            "bump" | "bumpsq" | "dbumpsq" => {
                let args = self.args()?;
                if name == "bump" {
                    arity(&args, &[2, 3])?;
                } else {
                    arity(&args, &[3])?;
                }
                let r0 = self.constant_arg(&args[0], "bump inner radius")?;
                let r1 = self.constant_arg(&args[1], "bump outer radius")?;
                if !(0.0 <= r0 && r0 < r1) {
                    return Err(FormError::Parse {
                        pos: at,
                        msg: format!("bump radii must satisfy 0 <= r0 < r1, got {r0}, {r1}"),
                    });
                }
                let rho = match (name, args.get(2)) {
                    ("bump", None) => Expr::NormSq,
                    ("bump", Some(e)) => Expr::mul(e.clone(), e.conj()),
                    (_, Some(e)) => e.clone(),
                    _ => unreachable!("arity checked"),
                };
                let order = if name == "dbumpsq" { 1 } else { 0 };
                Ok(Expr::bump_sq(r0, r1, order, rho))
            }
            _ => Err(FormError::Parse {
                pos: at,
                msg: format!("unknown identifier `{name}`"),
            }),
        }
    }
}

/// Parses an expression in `n` variables.
pub fn parse_expr(src: &str, n: usize) -> Result<Expr, FormError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0, n, src };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

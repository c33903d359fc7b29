//! Quaternion-valued expressions of time.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' uint)?
//! atom   := number | 'i' | 'j' | 'k' | 't' | param
//!         | '(' expr ')' | ('exp' | 'cos' | 'sin') '(' expr ')' | '-' atom
//! ```
//!
//! Products keep their source order and `x/y` means `x·y⁻¹`.

use std::fmt;

use crate::error::{Error, Result};
use crate::quaternion::Quaternion;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    I,
    J,
    K,
}

impl Unit {
    fn value(self) -> Quaternion {
        match self {
            Unit::I => Quaternion::I,
            Unit::J => Quaternion::J,
            Unit::K => Quaternion::K,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Unit::I => "i",
            Unit::J => "j",
            Unit::K => "k",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Cos,
    Sin,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Cos => "cos",
            Func::Sin => "sin",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Unit(Unit),
    Time,
    /// A named scalar parameter, bound with [`Expr::bind`] before evaluation.
    Param(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

/// Parses `src` with no parameter names in scope.
pub fn parse(src: &str) -> Result<Expr> {
    parse_with_params(src, &[])
}

/// Parses `src`, accepting each name in `params` as a [`Expr::Param`].
pub fn parse_with_params(src: &str, params: &[&str]) -> Result<Expr> {
    let mut p = Parser { src, pos: 0, params };
    p.skip_ws();
    if p.pos == src.len() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    params: &'a [&'a str],
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> Error {
        Error::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    /// Next significant character, after skipping whitespace.
    fn next_char(&mut self) -> Option<char> {
        self.skip_ws();
        self.peek()
    }

    fn expect(&mut self, want: char) -> Result<()> {
        if self.next_char() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{want}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.next_char() {
                Some('+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some('-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.next_char() {
                Some('*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some('/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.next_char() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected a nonnegative integer exponent"));
        }
        let exp = self.src[start..self.pos].parse::<u32>().map_err(|_| Error::Syntax {
            offset: start,
            message: "exponent out of range".into(),
        })?;
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next_char() {
            None => Err(self.syntax("unexpected end of input")),
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.atom()?)))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => self.identifier(),
            Some(c) => Err(self.syntax(&format!("unexpected character `{c}`"))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let digits = |p: &mut usize| {
            while *p < bytes.len() && bytes[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        let mut p = self.pos;
        digits(&mut p);
        if p < bytes.len() && bytes[p] == b'.' {
            p += 1;
            digits(&mut p);
        }
        if p < bytes.len() && (bytes[p] == b'e' || bytes[p] == b'E') {
            let mut q = p + 1;
            if q < bytes.len() && (bytes[q] == b'+' || bytes[q] == b'-') {
                q += 1;
            }
            let before = q;
            digits(&mut q);
            if q > before {
                p = q;
            }
        }
        self.pos = p;
        self.src[start..p]
            .parse::<f64>()
            .map(Expr::Num)
            .map_err(|_| Error::Syntax { offset: start, message: "malformed number".into() })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            self.pos += self.peek().map_or(1, char::len_utf8);
        }
        let name = &self.src[start..self.pos];
        let func = match name {
            "i" => return Ok(Expr::Unit(Unit::I)),
            "j" => return Ok(Expr::Unit(Unit::J)),
            "k" => return Ok(Expr::Unit(Unit::K)),
            "t" => return Ok(Expr::Time),
            "exp" => Func::Exp,
            "cos" => Func::Cos,
            "sin" => Func::Sin,
            _ if self.params.contains(&name) => return Ok(Expr::Param(name.to_string())),
            _ => return Err(Error::UnknownIdentifier { name: name.to_string(), offset: start }),
        };
        self.expect('(')?;
        let arg = self.expr()?;
        self.expect(')')?;
        Ok(Expr::Call(func, Box::new(arg)))
    }
}

/// Real-argument tolerance for `cos` and `sin`.
fn real_part_checked(func: Func, x: Quaternion) -> Result<f64> {
    if x.ve_norm() > 1e-12 * (1.0 + x.norm()) {
        return Err(Error::Domain { func: func.name(), arg: x.to_string() });
    }
    Ok(x.re())
}

impl Expr {
    pub fn eval(&self, t: f64) -> Result<Quaternion> {
        Ok(match self {
            Expr::Num(x) => Quaternion::real(*x),
            Expr::Unit(u) => u.value(),
            Expr::Time => Quaternion::real(t),
            Expr::Param(name) => return Err(Error::UnboundParameter(name.clone())),
            Expr::Neg(e) => -e.eval(t)?,
            Expr::Add(a, b) => a.eval(t)? + b.eval(t)?,
            Expr::Sub(a, b) => a.eval(t)? - b.eval(t)?,
            Expr::Mul(a, b) => a.eval(t)? * b.eval(t)?,
            Expr::Div(a, b) => a.eval(t)? * b.eval(t)?.inverse()?,
            Expr::Pow(base, n) => {
                let x = base.eval(t)?;
                (0..*n).fold(Quaternion::ONE, |acc, _| acc * x)
            }
            Expr::Call(f, arg) => {
                let x = arg.eval(t)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Cos => Quaternion::real(real_part_checked(*f, x)?.cos()),
                    Func::Sin => Quaternion::real(real_part_checked(*f, x)?.sin()),
                }
            }
        })
    }

    /// Replaces every `Param(name)` with the literal `value`.
    pub fn bind(&self, name: &str, value: f64) -> Expr {
        let b = |e: &Expr| Box::new(e.bind(name, value));
        match self {
            Expr::Param(p) if p == name => Expr::Num(value),
            Expr::Num(_) | Expr::Unit(_) | Expr::Time | Expr::Param(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(b(e)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Sub(x, y) => Expr::Sub(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Div(x, y) => Expr::Div(b(x), b(y)),
            Expr::Pow(x, n) => Expr::Pow(b(x), *n),
            Expr::Call(f, x) => Expr::Call(*f, b(x)),
        }
    }

    /// Whether the expression mentions `t`.
    pub fn depends_on_time(&self) -> bool {
        match self {
            Expr::Time => true,
            Expr::Num(_) | Expr::Unit(_) | Expr::Param(_) => false,
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.depends_on_time(),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y) => {
                x.depends_on_time() || y.depends_on_time()
            }
        }
    }

    pub fn params(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<String>) {
        match self {
            Expr::Param(p) => {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            Expr::Num(_) | Expr::Unit(_) | Expr::Time => {}
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Add(x, y) | Expr::Sub(x, y) | Expr::Mul(x, y) | Expr::Div(x, y) => {
                x.collect_params(out);
                y.collect_params(out);
            }
        }
    }
}

/// Fully parenthesized source text that parses back to an equal tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) => write!(f, "(-{:?})", -x),
            Expr::Num(x) => write!(f, "{x:?}"),
            Expr::Unit(u) => f.write_str(u.symbol()),
            Expr::Time => f.write_str("t"),
            Expr::Param(p) => f.write_str(p),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, n) => write!(f, "({a}^{n})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

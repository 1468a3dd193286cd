//! Recursive-descent parser for scalar field expressions.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := base ("^" number)?
//! base   := number | "x" | "y" | "r" | "pi" | func "(" expr ")" | "(" expr ")" | "-" base
//! func   := "sin" | "cos" | "exp" | "sqrt"
//! ```
//!
//! Unary minus binds tighter than `^`, so `-r^2` is `(-r)^2`; write `0 - r^2`
//! or `-1*r^2` for the negated square.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
}

/// Value with its gradient in (x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dual {
    v: f64,
    dx: f64,
    dy: f64,
}

impl Dual {
    fn constant(v: f64) -> Self {
        Self { v, dx: 0.0, dy: 0.0 }
    }

    fn chain(self, v: f64, slope: f64) -> Self {
        Self { v, dx: slope * self.dx, dy: slope * self.dy }
    }
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_dual(x, y).v
    }

    /// Value and analytic gradient. At `r = 0` the gradient of `r` is taken as zero.
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let d = self.eval_dual(x, y);
        (d.v, d.dx, d.dy)
    }

    fn eval_dual(&self, x: f64, y: f64) -> Dual {
        match self {
            Expr::Number(c) => Dual::constant(*c),
            Expr::Pi => Dual::constant(std::f64::consts::PI),
            Expr::Var(Var::X) => Dual { v: x, dx: 1.0, dy: 0.0 },
            Expr::Var(Var::Y) => Dual { v: y, dx: 0.0, dy: 1.0 },
            Expr::Var(Var::R) => {
                let r = x.hypot(y);
                if r == 0.0 {
                    Dual::constant(0.0)
                } else {
                    Dual { v: r, dx: x / r, dy: y / r }
                }
            }
            Expr::Neg(e) => {
                let a = e.eval_dual(x, y);
                Dual { v: -a.v, dx: -a.dx, dy: -a.dy }
            }
            Expr::Binary(op, l, r) => {
                let (a, b) = (l.eval_dual(x, y), r.eval_dual(x, y));
                match op {
                    BinOp::Add => Dual { v: a.v + b.v, dx: a.dx + b.dx, dy: a.dy + b.dy },
                    BinOp::Sub => Dual { v: a.v - b.v, dx: a.dx - b.dx, dy: a.dy - b.dy },
                    BinOp::Mul => Dual {
                        v: a.v * b.v,
                        dx: a.dx * b.v + a.v * b.dx,
                        dy: a.dy * b.v + a.v * b.dy,
                    },
                    BinOp::Div => {
                        let q = a.v / b.v;
                        Dual {
                            v: q,
                            dx: (a.dx - q * b.dx) / b.v,
                            dy: (a.dy - q * b.dy) / b.v,
                        }
                    }
                }
            }
            Expr::Pow(base, p) => {
                let a = base.eval_dual(x, y);
                let (v, slope) = if p.fract() == 0.0 && p.abs() < 64.0 {
                    let k = *p as i32;
                    let slope = if k == 0 { 0.0 } else { *p * a.v.powi(k - 1) };
                    (a.v.powi(k), slope)
                } else {
                    (a.v.powf(*p), *p * a.v.powf(p - 1.0))
                };
                a.chain(v, slope)
            }
            Expr::Call(f, arg) => {
                let a = arg.eval_dual(x, y);
                match f {
                    Func::Sin => a.chain(a.v.sin(), a.v.cos()),
                    Func::Cos => a.chain(a.v.cos(), -a.v.sin()),
                    Func::Exp => {
                        let e = a.v.exp();
                        a.chain(e, e)
                    }
                    Func::Sqrt => {
                        let s = a.v.sqrt();
                        a.chain(s, 0.5 / s)
                    }
                }
            }
        }
    }

    /// `Some(c)` when the expression mentions no variable.
    pub fn constant_value(&self) -> Option<f64> {
        fn has_var(e: &Expr) -> bool {
            match e {
                Expr::Number(_) | Expr::Pi => false,
                Expr::Var(_) => true,
                Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => has_var(a),
                Expr::Binary(_, a, b) => has_var(a) || has_var(b),
            }
        }
        (!has_var(self)).then(|| self.eval(0.0, 0.0))
    }
}

/// Fully parenthesized rendering that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(c) => write!(f, "{c:?}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Var(Var::R) => write!(f, "r"),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Pow(a, p) => write!(f, "({a})^{p:?}"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok,
    tok_start: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self> {
        let mut p = Self { src, pos: 0, tok: Tok::End, tok_start: 0 };
        p.advance()?;
        Ok(p)
    }

    fn error<T>(&self, offset: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { offset, message: message.into() })
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos == bytes.len() {
            self.tok = Tok::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            match text.parse::<f64>() {
                Ok(v) => self.tok = Tok::Num(v),
                Err(_) => return self.error(start, format!("malformed number '{text}'")),
            }
        } else if c.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Tok::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        } else {
            let ch = self.src[self.pos..].chars().next().unwrap();
            return self.error(self.pos, format!("unexpected character '{ch}'"));
        }
        Ok(())
    }

    fn expect(&mut self, sym: char) -> Result<()> {
        if self.tok == Tok::Sym(sym) {
            self.advance()
        } else {
            self.error(self.tok_start, format!("expected '{sym}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.tok == Tok::Sym('^') {
            self.advance()?;
            match self.tok {
                Tok::Num(p) => {
                    self.advance()?;
                    Ok(Expr::Pow(Box::new(base), p))
                }
                _ => self.error(self.tok_start, "exponent must be a number"),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let start = self.tok_start;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance()?;
                Ok(Expr::Number(v))
            }
            Tok::Sym('-') => {
                self.advance()?;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Tok::Sym('(') => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "x" => Some(Err(Var::X)),
                    "y" => Some(Err(Var::Y)),
                    "r" => Some(Err(Var::R)),
                    "pi" => None,
                    "sin" => Some(Ok(Func::Sin)),
                    "cos" => Some(Ok(Func::Cos)),
                    "exp" => Some(Ok(Func::Exp)),
                    "sqrt" => Some(Ok(Func::Sqrt)),
                    _ => return self.error(start, format!("unknown identifier '{name}'")),
                };
                self.advance()?;
                match func {
                    None => Ok(Expr::Pi),
                    Some(Err(v)) => Ok(Expr::Var(v)),
                    Some(Ok(f)) => {
                        self.expect('(')?;
                        let arg = self.expr()?;
                        self.expect(')')?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                }
            }
            Tok::End => self.error(start, "unexpected end of input"),
            Tok::Sym(c) => self.error(start, format!("unexpected '{c}'")),
        }
    }
}

pub fn parse_expr(source: &str) -> Result<Expr> {
    if source.trim().is_empty() {
        return Err(Error::Parse { offset: 0, message: "empty expression".into() });
    }
    let mut p = Parser::new(source)?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.error(p.tok_start, "unexpected trailing input");
    }
    Ok(e)
}

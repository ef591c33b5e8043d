//! Closed-form coefficient rules in the integer variable `n`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | factor
//! factor := atom ("^" (integer | "n"))?
//! atom   := integer | "n" | "(" expr ")" | "sqrt(" expr ")" | "fact(" expr ")"
//! ```

use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::series::factorial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("rule syntax error at position {position}: {message}")]
pub struct RuleParseError {
    /// Byte offset into the rule text.
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero at n = {n}")]
    DivisionByZero { n: u64 },
    #[error("square root of a negative value at n = {n}")]
    NegativeSqrt { n: u64 },
    #[error("factorial of {value} at n = {n} (needs a nonnegative integer)")]
    BadFactorial { n: u64, value: String },
    #[error("value overflows binary64 at n = {n}")]
    Overflow { n: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exponent {
    Int(u32),
    N,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(BigInt),
    N,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Sqrt(Box<Expr>),
    Fact(Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::N => f.write_str("n"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, Exponent::Int(e)) => write!(f, "{a}^{e}"),
            Expr::Pow(a, Exponent::N) => write!(f, "{a}^n"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
            Expr::Fact(a) => write!(f, "fact({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    N,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Sqrt,
    Fact,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, RuleParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: BigInt = text[start..i].parse().expect("ascii digits");
                out.push((start, Tok::Int(v)));
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let tok = match &text[start..i] {
                    "n" => Tok::N,
                    "sqrt" => Tok::Sqrt,
                    "fact" => Tok::Fact,
                    other => {
                        return Err(RuleParseError {
                            position: start,
                            message: format!("unknown identifier {other:?}"),
                        })
                    }
                };
                out.push((start, tok));
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(RuleParseError {
                    position: start,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        };
        out.push((start, tok));
        i += 1;
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
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err(&self, message: impl Into<String>) -> RuleParseError {
        RuleParseError {
            position: self.here(),
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), RuleParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, RuleParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, RuleParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, RuleParseError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr, RuleParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let exponent = match self.bump() {
            Some(Tok::N) => Exponent::N,
            Some(Tok::Int(v)) => match v.to_u32() {
                Some(e) => Exponent::Int(e),
                None => {
                    self.pos -= 1;
                    return Err(self.err("exponent too large"));
                }
            },
            _ => {
                self.pos -= 1;
                return Err(self.err("exponent must be an integer constant or n"));
            }
        };
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn atom(&mut self) -> Result<Expr, RuleParseError> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(Expr::Int(v)),
            Some(Tok::N) => Ok(Expr::N),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Sqrt) => {
                self.expect(Tok::LParen, "'(' after sqrt")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Sqrt(Box::new(e)))
            }
            Some(Tok::Fact) => {
                self.expect(Tok::LParen, "'(' after fact")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Expr::Fact(Box::new(e)))
            }
            None => {
                self.pos -= 1;
                Err(self.err("unexpected end of rule"))
            }
            Some(_) => {
                self.pos -= 1;
                Err(self.err("expected a number, n, '(' , sqrt( or fact("))
            }
        }
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, RuleParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

fn f64_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=170u64)
            .map(|i| factorial(i).to_f64().unwrap_or(f64::INFINITY))
            .collect()
    })
}

impl Expr {
    pub fn depends_on_n(&self) -> bool {
        match self {
            Expr::Int(_) => false,
            Expr::N => true,
            Expr::Pow(_, Exponent::N) => true,
            Expr::Neg(a) | Expr::Sqrt(a) | Expr::Fact(a) | Expr::Pow(a, Exponent::Int(_)) => a.depends_on_n(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_n() || b.depends_on_n()
            }
        }
    }

    pub fn is_sqrt_free(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::N => true,
            Expr::Sqrt(_) => false,
            Expr::Neg(a) | Expr::Fact(a) | Expr::Pow(a, _) => a.is_sqrt_free(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_sqrt_free() && b.is_sqrt_free()
            }
        }
    }

    /// Syntactic certificate that the value is `>= 0` for every `n`.
    pub fn is_manifestly_nonnegative(&self) -> bool {
        match self {
            Expr::Int(v) => !v.is_negative(),
            Expr::N | Expr::Sqrt(_) | Expr::Fact(_) => true,
            Expr::Neg(a) => a.is_identically_zero_constant(),
            Expr::Sub(_, _) => self.constant_value().is_some_and(|v| !v.is_negative()),
            Expr::Add(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_manifestly_nonnegative() && b.is_manifestly_nonnegative()
            }
            Expr::Pow(a, Exponent::Int(e)) => e % 2 == 0 || a.is_manifestly_nonnegative(),
            Expr::Pow(a, Exponent::N) => a.is_manifestly_nonnegative(),
        }
    }

    fn is_identically_zero_constant(&self) -> bool {
        self.constant_value().is_some_and(|v| v.is_zero())
    }

    /// Exact value of an `n`-free, sqrt-free expression.
    fn constant_value(&self) -> Option<BigRational> {
        if self.depends_on_n() || !self.is_sqrt_free() {
            return None;
        }
        self.eval_exact(0).ok()
    }

    fn constant_f64(&self) -> Option<f64> {
        if self.depends_on_n() {
            return None;
        }
        self.eval_f64(0).ok()
    }

    /// Degree bound when the expression is a polynomial in `n`.
    fn polynomial_degree(&self) -> Option<u32> {
        match self {
            Expr::Int(_) => Some(0),
            Expr::N => Some(1),
            Expr::Neg(a) => a.polynomial_degree(),
            Expr::Add(a, b) | Expr::Sub(a, b) => Some(a.polynomial_degree()?.max(b.polynomial_degree()?)),
            Expr::Mul(a, b) => Some(a.polynomial_degree()? + b.polynomial_degree()?),
            Expr::Div(a, b) => {
                let d = a.polynomial_degree()?;
                b.constant_value().filter(|v| !v.is_zero()).map(|_| d)
            }
            Expr::Pow(a, Exponent::Int(e)) => a.polynomial_degree()?.checked_mul(*e),
            _ if !self.depends_on_n() && self.is_sqrt_free() => Some(0),
            _ => None,
        }
    }

    /// `lim |t_n|^(1/n)` for the families whose limit is known in closed
    /// form: nonzero polynomials in `n`, constant bases raised to `n`,
    /// `fact(n)`, and products, quotients and square roots of those.
    /// `None` means "unknown", never "zero".
    pub(crate) fn root_growth(&self) -> Option<f64> {
        if !self.depends_on_n() {
            let v = self.constant_f64()?;
            return (v != 0.0).then_some(1.0);
        }
        if let Some(deg) = self.polynomial_degree() {
            // A nonzero polynomial of degree <= deg has a nonzero value
            // among any deg + 1 points.
            let nonzero = (0..=u64::from(deg)).any(|n| self.eval_exact(n).is_ok_and(|v| !v.is_zero()));
            return nonzero.then_some(1.0);
        }
        match self {
            Expr::Neg(a) => a.root_growth(),
            Expr::Mul(a, b) => {
                let (x, y) = (a.root_growth()?, b.root_growth()?);
                let degenerate = (x == 0.0 && y.is_infinite()) || (x.is_infinite() && y == 0.0);
                (!degenerate).then_some(x * y)
            }
            Expr::Div(a, b) => {
                let (x, y) = (a.root_growth()?, b.root_growth()?);
                let degenerate = (x == 0.0 && y == 0.0) || (x.is_infinite() && y.is_infinite());
                (!degenerate).then_some(x / y)
            }
            Expr::Pow(base, Exponent::N) => {
                let r = base.constant_f64()?.abs();
                (r > 0.0).then_some(r)
            }
            Expr::Pow(base, Exponent::Int(e)) => Some(base.root_growth()?.powi(*e as i32)),
            Expr::Sqrt(a) => Some(a.root_growth()?.sqrt()),
            Expr::Fact(a) if **a == Expr::N => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Radius of convergence of `sum t_n y^n` when [`Self::root_growth`]
    /// knows the growth rate, or the rule is the zero constant.
    pub fn derived_radius(&self) -> Option<f64> {
        if self.is_identically_zero_constant() {
            return Some(f64::INFINITY);
        }
        self.root_growth().map(|l| 1.0 / l)
    }

    pub fn eval_exact(&self, n: u64) -> Result<BigRational, EvalError> {
        Ok(match self {
            Expr::Int(v) => BigRational::from_integer(v.clone()),
            Expr::N => BigRational::from_integer(BigInt::from(n)),
            Expr::Neg(a) => -a.eval_exact(n)?,
            Expr::Add(a, b) => a.eval_exact(n)? + b.eval_exact(n)?,
            Expr::Sub(a, b) => a.eval_exact(n)? - b.eval_exact(n)?,
            Expr::Mul(a, b) => a.eval_exact(n)? * b.eval_exact(n)?,
            Expr::Div(a, b) => {
                let d = b.eval_exact(n)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero { n });
                }
                a.eval_exact(n)? / d
            }
            Expr::Pow(a, e) => {
                let exp = match e {
                    Exponent::Int(k) => *k as usize,
                    Exponent::N => n as usize,
                };
                num_traits::pow(a.eval_exact(n)?, exp)
            }
            Expr::Fact(a) => {
                let v = a.eval_exact(n)?;
                match (v.is_integer() && !v.is_negative())
                    .then(|| v.to_integer().to_u64())
                    .flatten()
                {
                    Some(m) => BigRational::from_integer(BigInt::from(factorial(m))),
                    None => {
                        return Err(EvalError::BadFactorial {
                            n,
                            value: v.to_string(),
                        })
                    }
                }
            }
            Expr::Sqrt(_) => unreachable!("exact evaluation of a rule containing sqrt"),
        })
    }

    pub fn eval_f64(&self, n: u64) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Int(v) => v.to_f64().unwrap_or(f64::INFINITY),
            Expr::N => n as f64,
            Expr::Neg(a) => -a.eval_f64(n)?,
            Expr::Add(a, b) => a.eval_f64(n)? + b.eval_f64(n)?,
            Expr::Sub(a, b) => a.eval_f64(n)? - b.eval_f64(n)?,
            Expr::Mul(a, b) => a.eval_f64(n)? * b.eval_f64(n)?,
            Expr::Div(a, b) => {
                let d = b.eval_f64(n)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero { n });
                }
                a.eval_f64(n)? / d
            }
            Expr::Pow(a, e) => {
                let base = a.eval_f64(n)?;
                let exp = match e {
                    Exponent::Int(k) => u64::from(*k),
                    Exponent::N => n,
                };
                match i32::try_from(exp) {
                    Ok(k) => base.powi(k),
                    Err(_) => base.powf(exp as f64),
                }
            }
            Expr::Sqrt(a) => {
                let v = a.eval_f64(n)?;
                if v < 0.0 {
                    return Err(EvalError::NegativeSqrt { n });
                }
                v.sqrt()
            }
            Expr::Fact(a) => {
                let v = a.eval_f64(n)?;
                if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
                    return Err(EvalError::BadFactorial {
                        n,
                        value: v.to_string(),
                    });
                }
                f64_factorials().get(v as usize).copied().unwrap_or(f64::INFINITY)
            }
        })
    }
}

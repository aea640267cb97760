//! Small arithmetic expression language used in config files.
//!
//! Lengths accept closed forms such as `cbrt(2)` or `pi/2`; coupling profiles
//! are expressions in `x` that must reduce to a polynomial times at most one
//! harmonic factor, e.g. `x*(1-x)` or `cbrt(2)*cos(pi*x/(3*cbrt(2)))`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let err = |reason: String| Error::Expression {
        input: input.to_string(),
        reason,
    };
    let chars: Vec<char> = input.chars().collect();
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
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse::<f64>()
                .map_err(|_| err(format!("bad number `{text}`")))?;
            out.push(Token::Num(value));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            i += 1;
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    Var,
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(String, Box<Node>),
}

struct Parser<'a> {
    input: &'a str,
    tokens: Vec<Token>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Expression {
            input: self.input.to_string(),
            reason: reason.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    // power := atom ('^' unary)?   (right associative)
    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Node::Num(v)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.err("missing `)`")),
                }
            }
            Some(Token::Ident(name)) => match name.as_str() {
                "x" => Ok(Node::Var),
                "pi" => Ok(Node::Num(PI)),
                "inf" | "infinity" => Ok(Node::Num(f64::INFINITY)),
                _ => {
                    if !matches!(self.next(), Some(Token::LParen)) {
                        return Err(self.err(format!("unknown identifier `{name}`")));
                    }
                    let arg = self.expr()?;
                    if !matches!(self.next(), Some(Token::RParen)) {
                        return Err(self.err("missing `)` after function argument"));
                    }
                    match name.as_str() {
                        "cbrt" | "sqrt" | "cos" | "sin" | "exp" | "ln" => {
                            Ok(Node::Call(name, Box::new(arg)))
                        }
                        _ => Err(self.err(format!("unknown function `{name}`"))),
                    }
                }
            },
            Some(t) => Err(self.err(format!("unexpected token {t:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

fn parse(input: &str) -> Result<Node> {
    let tokens = tokenize(input)?;
    let mut p = Parser {
        input,
        tokens,
        pos: 0,
    };
    let node = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(node)
}

/// Parses a constant expression (`"cbrt(2)"`, `"pi"`, `"0.5"`, `"inf"`).
pub fn parse_real(input: &str) -> Result<f64> {
    match classify(&parse(input)?, input)? {
        Form::Poly(p) if p.len() <= 1 => Ok(p.first().copied().unwrap_or(0.0)),
        _ => Err(Error::Expression {
            input: input.to_string(),
            reason: "expected a constant expression".into(),
        }),
    }
}

/// `cos(freq * x + phase)`; a sine factor is stored with its phase shifted by -π/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub freq: f64,
    pub phase: f64,
}

/// Real profile `poly(x) * cos(freq x + phase)` (or just `poly(x)`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    /// Monomial coefficients, lowest degree first.
    pub poly: Vec<f64>,
    pub harmonic: Option<Harmonic>,
}

impl Profile {
    pub fn polynomial(poly: Vec<f64>) -> Self {
        Self {
            poly: trim(poly),
            harmonic: None,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    pub fn cosine(amplitude: f64, freq: f64) -> Self {
        Self {
            poly: vec![amplitude],
            harmonic: Some(Harmonic { freq, phase: 0.0 }),
        }
    }

    pub fn parse(input: &str) -> Result<Self> {
        match classify(&parse(input)?, input)? {
            Form::Poly(p) => Ok(Self::polynomial(p)),
            Form::Harm(p, h) => Ok(Self {
                poly: trim(p),
                harmonic: Some(h),
            }),
        }
    }

    pub fn degree(&self) -> usize {
        self.poly.len().saturating_sub(1)
    }

    pub fn frequency(&self) -> f64 {
        self.harmonic.map_or(0.0, |h| h.freq.abs())
    }

    fn poly_eval(&self, x: f64) -> f64 {
        self.poly.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn poly_deriv(&self, x: f64) -> f64 {
        self.poly
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.poly_eval(x);
        match self.harmonic {
            None => p,
            Some(h) => p * (h.freq * x + h.phase).cos(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let dp = self.poly_deriv(x);
        match self.harmonic {
            None => dp,
            Some(h) => {
                let arg = h.freq * x + h.phase;
                dp * arg.cos() - self.poly_eval(x) * h.freq * arg.sin()
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.poly.iter().all(|&c| c == 0.0)
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .poly
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, c)| match i {
                0 => format!("{c:.17e}"),
                1 => format!("{c:.17e}*x"),
                _ => format!("{c:.17e}*x^{i}"),
            })
            .collect();
        let poly = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        match self.harmonic {
            None => write!(f, "{poly}"),
            Some(h) => write!(f, "({poly})*cos({:.17e}*x + {:.17e})", h.freq, h.phase),
        }
    }
}

fn trim(mut p: Vec<f64>) -> Vec<f64> {
    while p.len() > 1 && p.last() == Some(&0.0) {
        p.pop();
    }
    if p.is_empty() {
        p.push(0.0);
    }
    p
}

enum Form {
    Poly(Vec<f64>),
    Harm(Vec<f64>, Harmonic),
}

fn poly_add(a: &[f64], b: &[f64], sign: f64) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0.0) + sign * b.get(i).copied().unwrap_or(0.0))
        .collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn as_const(p: &[f64]) -> Option<f64> {
    let p = trim(p.to_vec());
    (p.len() == 1).then(|| p[0])
}

fn classify(node: &Node, input: &str) -> Result<Form> {
    let err = |reason: &str| Error::Expression {
        input: input.to_string(),
        reason: reason.to_string(),
    };
    let unsupported = || err("profile must be a polynomial times at most one cos/sin factor");
    Ok(match node {
        Node::Num(v) => Form::Poly(vec![*v]),
        Node::Var => Form::Poly(vec![0.0, 1.0]),
        Node::Neg(inner) => match classify(inner, input)? {
            Form::Poly(p) => Form::Poly(p.iter().map(|c| -c).collect()),
            Form::Harm(p, h) => Form::Harm(p.iter().map(|c| -c).collect(), h),
        },
        Node::Bin(op, l, r) => {
            let l = classify(l, input)?;
            let r = classify(r, input)?;
            match (op, l, r) {
                ('+' | '-', Form::Poly(a), Form::Poly(b)) => {
                    Form::Poly(poly_add(&a, &b, if *op == '+' { 1.0 } else { -1.0 }))
                }
                ('+' | '-', Form::Harm(a, ha), Form::Harm(b, hb)) if ha == hb => {
                    Form::Harm(poly_add(&a, &b, if *op == '+' { 1.0 } else { -1.0 }), ha)
                }
                ('+' | '-', Form::Harm(a, h), Form::Poly(b)) if b.iter().all(|&c| c == 0.0) => {
                    Form::Harm(a, h)
                }
                ('*', Form::Poly(a), Form::Poly(b)) => Form::Poly(poly_mul(&a, &b)),
                ('*', Form::Poly(a), Form::Harm(b, h)) | ('*', Form::Harm(b, h), Form::Poly(a)) => {
                    Form::Harm(poly_mul(&a, &b), h)
                }
                ('/', num, Form::Poly(b)) => {
                    let d = as_const(&b).ok_or_else(|| err("division by a non-constant"))?;
                    match num {
                        Form::Poly(a) => Form::Poly(a.iter().map(|c| c / d).collect()),
                        Form::Harm(a, h) => Form::Harm(a.iter().map(|c| c / d).collect(), h),
                    }
                }
                ('^', Form::Poly(a), Form::Poly(b)) => {
                    let e = as_const(&b).ok_or_else(|| err("non-constant exponent"))?;
                    if let Some(base) = as_const(&a) {
                        Form::Poly(vec![base.powf(e)])
                    } else if e >= 0.0 && e.fract() == 0.0 && e <= 32.0 {
                        let mut acc = vec![1.0];
                        for _ in 0..e as usize {
                            acc = poly_mul(&acc, &a);
                        }
                        Form::Poly(acc)
                    } else {
                        return Err(err("polynomial powers need a small non-negative integer exponent"));
                    }
                }
                _ => return Err(unsupported()),
            }
        }
        Node::Call(name, arg) => {
            let Form::Poly(a) = classify(arg, input)? else {
                return Err(unsupported());
            };
            let a = trim(a);
            if let Some(c) = as_const(&a) {
                let v = match name.as_str() {
                    "cbrt" => c.cbrt(),
                    "sqrt" => c.sqrt(),
                    "cos" => c.cos(),
                    "sin" => c.sin(),
                    "exp" => c.exp(),
                    "ln" => c.ln(),
                    _ => unreachable!("function names are checked by the parser"),
                };
                Form::Poly(vec![v])
            } else if a.len() == 2 && (name == "cos" || name == "sin") {
                let shift = if name == "sin" { -FRAC_PI_2 } else { 0.0 };
                Form::Harm(
                    vec![1.0],
                    Harmonic {
                        freq: a[1],
                        phase: a[0] + shift,
                    },
                )
            } else {
                return Err(unsupported());
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert_eq!(parse_real("cbrt(2)").unwrap(), 2f64.cbrt());
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("inf").unwrap(), f64::INFINITY);
        assert!((parse_real("2^(1/3) - cbrt(2)").unwrap()).abs() < 1e-15);
        assert_eq!(parse_real("-1.5e-3").unwrap(), -1.5e-3);
        assert!(parse_real("x").is_err());
        assert!(parse_real("foo(2)").is_err());
        assert!(parse_real("(1").is_err());
    }

    #[test]
    fn tadpole_profile() {
        let p = Profile::parse("x*(1-x)").unwrap();
        assert_eq!(p.poly, vec![0.0, 1.0, -1.0]);
        assert!(p.harmonic.is_none());
        assert!((p.eval(0.25) - 0.1875).abs() < 1e-16);
        assert!((p.deriv(0.25) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn star_profile() {
        let p = Profile::parse("cbrt(2)*cos(pi*x/(3*cbrt(2)))").unwrap();
        let l = 2f64.cbrt();
        for &x in &[0.0, 0.3, 1.1] {
            let want = l * (PI * x / (3.0 * l)).cos();
            assert!((p.eval(x) - want).abs() < 1e-15);
            let dwant = -l * PI / (3.0 * l) * (PI * x / (3.0 * l)).sin();
            assert!((p.deriv(x) - dwant).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_is_shifted_cosine() {
        let p = Profile::parse("x^2*sin(2*x+1)").unwrap();
        assert!((p.eval(0.7) - 0.49 * (2.4f64).sin()).abs() < 1e-15);
    }

    #[test]
    fn rejects_products_of_harmonics() {
        assert!(Profile::parse("cos(x)*sin(x)").is_err());
        assert!(Profile::parse("cos(x^2)").is_err());
        assert!(Profile::parse("1/x").is_err());
    }
}

//! A small polynomial expression grammar for field components and custom
//! chart maps: variables `x0..x{n-1}`, `+`, `-`, `*`, integer powers with
//! `^`, real literals, and parentheses.

use crate::calculus::{RealMap, Taylor};
use crate::error::{Error, Result};

/// Parsed polynomial expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn parse(input: &str) -> Result<Expr> {
        let mut p = Parser {
            chars: input.chars().collect(),
            pos: 0,
            src: input,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.chars.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) => a.max_var(),
            Expr::Pow(a, _) => a.max_var(),
        }
    }

    pub fn eval_taylor(&self, xs: &[Taylor]) -> Taylor {
        match self {
            Expr::Const(c) => xs[0].lift(*c),
            Expr::Var(i) => xs[*i].clone(),
            Expr::Add(a, b) => a.eval_taylor(xs).add(&b.eval_taylor(xs)),
            Expr::Sub(a, b) => a.eval_taylor(xs).sub(&b.eval_taylor(xs)),
            Expr::Mul(a, b) => a.eval_taylor(xs).mul(&b.eval_taylor(xs)),
            Expr::Neg(a) => a.eval_taylor(xs).neg(),
            Expr::Pow(a, k) => a.eval_taylor(xs).powi(*k as i32),
        }
    }
}

struct Parser<'s> {
    chars: Vec<char>,
    pos: usize,
    src: &'s str,
}

impl<'s> Parser<'s> {
    fn err(&self, msg: &str) -> Error {
        Error::Invalid(format!(
            "parse error at offset {} in `{}`: {msg}",
            self.pos, self.src
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                '+' => {
                    self.bump();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                '-' => {
                    self.bump();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while let Some('*') = self.peek() {
            self.bump();
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some('^') = self.peek() {
            self.bump();
            let k = self.unsigned_int()?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some('-') => {
                self.bump();
                // negation binds looser than `^`: -x0^2 is -(x0^2)
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some('(') => {
                self.bump();
                let e = self.expr()?;
                match self.bump() {
                    Some(')') => Ok(e),
                    _ => Err(self.err("expected `)`")),
                }
            }
            Some('x') => {
                self.bump();
                let i = self.unsigned_int()?;
                Ok(Expr::Var(i as usize))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) => Err(self.err(&format!("unexpected character `{c}`"))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn unsigned_int(&mut self) -> Result<u32> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse().map_err(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() || c == '.' {
                self.pos += 1;
            } else if (c == 'e' || c == 'E')
                && self.pos + 1 < self.chars.len()
                && (self.chars[self.pos + 1].is_ascii_digit()
                    || self.chars[self.pos + 1] == '-'
                    || self.chars[self.pos + 1] == '+')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .map(Expr::Const)
            .map_err(|_| self.err(&format!("bad number `{text}`")))
    }
}

/// Parse a comma-separated list of polynomial expressions into a map
/// ℝ^{dim} → ℝ^{count}.
pub fn parse_component_list(input: &str, dim: usize) -> Result<RealMap> {
    let parts: Vec<&str> = input.split(',').collect();
    if parts.iter().any(|p| p.trim().is_empty()) {
        return Err(Error::Invalid(format!("empty component in `{input}`")));
    }
    let exprs: Vec<Expr> = parts
        .iter()
        .map(|p| Expr::parse(p))
        .collect::<Result<_>>()?;
    for e in &exprs {
        if let Some(v) = e.max_var() {
            if v >= dim {
                return Err(Error::Invalid(format!(
                    "variable x{v} out of range for dimension {dim}"
                )));
            }
        }
    }
    let out_dim = exprs.len();
    Ok(RealMap::new(dim, out_dim, move |xs| {
        exprs.iter().map(|e| e.eval_taylor(xs)).collect()
    }))
}

/// Parse a single scalar polynomial expression on `dim` variables.
pub fn parse_scalar(input: &str, dim: usize) -> Result<RealMap> {
    let map = parse_component_list(input, dim)?;
    if map.out_dim() != 1 {
        return Err(Error::Invalid("expected exactly one expression".into()));
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let f = parse_component_list("x0^2 + 2*x1 - 0.5, -x0*x1", 2).unwrap();
        let v = f.eval(&[3.0, -1.0]).unwrap();
        assert_eq!(v, vec![9.0 - 2.0 - 0.5, 3.0]);
    }

    #[test]
    fn scientific_literals() {
        let f = parse_scalar("1e-3 + x0", 1).unwrap();
        assert!((f.eval(&[0.0]).unwrap()[0] - 1e-3).abs() < 1e-18);
    }

    #[test]
    fn jets_flow_through_parsed_expressions() {
        let f = parse_scalar("x0^3", 1).unwrap();
        let jets = f.jet_eval(&[2.0], 2).unwrap();
        assert_eq!(jets[0].value(), 8.0);
        assert_eq!(jets[0].gradient(), &[12.0]);
        assert_eq!(jets[0].tensor(2), &[12.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Expr::parse("x0 +").is_err());
        assert!(Expr::parse("(x0").is_err());
        assert!(Expr::parse("y0").is_err());
        assert!(parse_component_list("x2", 2).is_err());
        assert!(parse_component_list("x0,,x1", 2).is_err());
    }

    #[test]
    fn unary_minus_binds_tightly() {
        let f = parse_scalar("-x0^2", 1).unwrap();
        // -(x0^2), matching ordinary convention
        assert_eq!(f.eval(&[3.0]).unwrap()[0], -9.0);
    }
}

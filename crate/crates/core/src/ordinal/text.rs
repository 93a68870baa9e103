//! Text syntax: `w` (or `ω`) for omega, `^`, `*`, `+`, parentheses and
//! natural numbers. Exponentiation is only defined with base `w`.

use num_bigint::BigUint;

use super::Ordinal;
use crate::error::{Error, Result};

pub fn parse_ordinal(src: &str) -> Result<Ordinal> {
    let mut p = Parser { chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0 };
    if p.chars.is_empty() {
        return Err(Error::Parse("empty ordinal expression".into()));
    }
    let value = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(Error::Parse(format!("unexpected `{}` at offset {}", p.chars[p.pos], p.pos)));
    }
    Ok(value)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Ordinal> {
        let mut acc = self.term()?;
        while self.eat('+') {
            acc = acc.add(&self.term()?);
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Ordinal> {
        let mut acc = self.power()?;
        while self.eat('*') {
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Ordinal> {
        let omega = matches!(self.peek(), Some('w') | Some('ω'));
        let base = self.primary()?;
        if self.eat('^') {
            if !omega {
                return Err(Error::Parse("only `w` may be raised to a power".into()));
            }
            let exp = self.primary()?;
            return Ok(Ordinal::omega_pow(exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Ordinal> {
        match self.peek() {
            Some('w') | Some('ω') => {
                self.pos += 1;
                Ok(Ordinal::omega())
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                let n: BigUint = digits.parse().map_err(|_| Error::Parse(format!("bad number `{digits}`")))?;
                Ok(Ordinal::finite(n))
            }
            Some(c) => Err(Error::Parse(format!("unexpected `{c}` at offset {}", self.pos))),
            None => Err(Error::Parse("unexpected end of input".into())),
        }
    }
}

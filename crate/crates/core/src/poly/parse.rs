//! Recursive-descent parser for the polynomial grammar
//!
//! ```text
//! poly   := term (('+'|'-') term)*
//! term   := coeff ('*' factor)* | factor ('*' factor)*
//! factor := var ('^' uint)?
//! coeff  := uint
//! ```
//!
//! Whitespace is ignored and a single leading `-` is allowed.

use std::sync::Arc;

use num_bigint::BigUint;

use super::{Monomial, Ring, SparsePoly};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigUint),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            c if c.is_ascii_whitespace() => i += 1,
            '+' => {
                out.push((start, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((start, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((start, Tok::Star));
                i += 1;
            }
            '^' => {
                out.push((start, Tok::Caret));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = text[start..i].parse::<BigUint>().expect("digits");
                out.push((start, Tok::Num(n)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::Syntax {
                    position: start,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    ring: &'a Arc<Ring>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error<T>(&self, message: &str) -> Result<T> {
        Err(Error::Syntax {
            position: self.offset(),
            message: message.to_string(),
        })
    }

    fn poly(&mut self) -> Result<SparsePoly> {
        let mut acc = SparsePoly::zero(self.ring);
        let mut negate = false;
        if self.peek() == Some(&Tok::Minus) {
            negate = true;
            self.pos += 1;
        }
        loop {
            let term = self.term()?;
            acc = if negate { acc.sub(&term)? } else { acc.add(&term)? };
            match self.peek() {
                None => return Ok(acc),
                Some(Tok::Plus) => negate = false,
                Some(Tok::Minus) => negate = true,
                Some(_) => return self.error("expected `+`, `-` or end of input"),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<SparsePoly> {
        let p = self.ring.prime();
        let arity = self.ring.arity();
        let mut coeff = 1u32;
        let mut exps = vec![0u64; arity];
        match self.peek() {
            Some(Tok::Num(n)) => {
                coeff = p.reduce_big(n);
                self.pos += 1;
            }
            Some(Tok::Ident(_)) => self.factor(&mut exps)?,
            _ => return self.error("expected a coefficient or variable"),
        }
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            self.factor(&mut exps)?;
        }
        let degree: u64 = exps.iter().sum();
        let limit = self.ring.limits().max_total_degree;
        if degree > limit {
            return Err(Error::DegreeOverflow { degree, limit });
        }
        let m: Vec<u32> = exps.iter().map(|&e| e as u32).collect();
        Ok(SparsePoly::monomial(
            self.ring,
            Monomial::from_exponents(&m),
            coeff,
        ))
    }

    fn factor(&mut self, exps: &mut [u64]) -> Result<()> {
        let (at, tok) = match self.toks.get(self.pos) {
            Some(x) => x.clone(),
            None => return self.error("expected a variable"),
        };
        let Tok::Ident(name) = tok else {
            return self.error("expected a variable");
        };
        let index = self
            .ring
            .var_index(&name)
            .ok_or(Error::UnknownVariable { name, position: at })?;
        self.pos += 1;
        let mut power = 1u64;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Num(n)) => {
                    let limit = self.ring.limits().max_total_degree;
                    power = u64::try_from(n)
                        .ok()
                        .filter(|&k| k <= limit)
                        .ok_or(Error::DegreeOverflow {
                            degree: u64::MAX,
                            limit,
                        })?;
                    self.pos += 1;
                }
                _ => return self.error("expected an exponent"),
            }
        }
        exps[index] = exps[index].saturating_add(power);
        Ok(())
    }
}

pub(super) fn parse(text: &str, ring: &Arc<Ring>) -> Result<SparsePoly> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(Error::Syntax {
            position: 0,
            message: "empty polynomial".into(),
        });
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        ring,
    };
    parser.poly()
}

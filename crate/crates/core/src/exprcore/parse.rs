//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+'|'-') term)* ;
//! term   := factor (('*'|'/') factor)* ;
//! factor := '-' factor | base ('^' factor)? ;
//! base   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')' ;
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::expr::{Expr, Func};
use super::symbols::SymbolTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownSymbol(String),
    UnknownFunction(String),
    MalformedNumber,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input.
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error at offset {}: {m}", self.offset),
            ParseErrorKind::UnknownSymbol(s) => write!(f, "unknown symbol `{s}` at offset {}", self.offset),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function `{s}` at offset {}", self.offset),
            ParseErrorKind::MalformedNumber => write!(f, "malformed number at offset {}", self.offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(u8),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, kind: ParseErrorKind, offset: usize) -> ParseError {
        ParseError { kind, offset }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        loop {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
                self.pos += 1;
            }
            let start = self.pos;
            let Some(&c) = self.src.get(self.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            if c.is_ascii_digit() {
                out.push((self.number()?, start));
            } else if c.is_ascii_alphabetic() {
                while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                out.push((Tok::Ident(name.to_string()), start));
            } else if b"+-*/^()".contains(&c) {
                self.pos += 1;
                out.push((Tok::Op(c), start));
            } else {
                return Err(self.err(ParseErrorKind::Syntax(format!("unexpected character `{}`", c as char)), start));
            }
        }
    }

    fn number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let int_part = &self.src[start..self.pos];
        let mut frac_part: &[u8] = &[];
        if self.src.get(self.pos) == Some(&b'.') {
            let fs = self.pos + 1;
            let mut fe = fs;
            while fe < self.src.len() && self.src[fe].is_ascii_digit() {
                fe += 1;
            }
            if fe == fs {
                return Err(self.err(ParseErrorKind::MalformedNumber, start));
            }
            frac_part = &self.src[fs..fe];
            self.pos = fe;
        }
        if matches!(self.src.get(self.pos), Some(b'.')) {
            return Err(self.err(ParseErrorKind::MalformedNumber, start));
        }
        let digits = [int_part, frac_part].concat();
        let n: BigInt = std::str::from_utf8(&digits)
            .expect("ascii")
            .parse()
            .map_err(|_| self.err(ParseErrorKind::MalformedNumber, start))?;
        let d = num_traits::pow(BigInt::from(10), frac_part.len());
        Ok(Tok::Num(BigRational::new(n, d)))
    }
}

struct Parser<'t> {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    table: &'t SymbolTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn offset(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError {
            kind: ParseErrorKind::Syntax(msg.to_string()),
            offset: self.offset(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Op(b'+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op(b'-') => {
                    self.bump();
                    terms.push(Expr::neg(self.term()?));
                }
                _ => break,
            }
        }
        Ok(Expr::add(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Op(b'*') => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::mul(vec![acc, rhs]);
                }
                Tok::Op(b'/') => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = Expr::mul(vec![acc, Expr::powi(rhs, -1)]);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == &Tok::Op(b'-') {
            self.bump();
            return Ok(Expr::neg(self.factor()?));
        }
        let base = self.base()?;
        if self.peek() == &Tok::Op(b'^') {
            self.bump();
            let exp = self.factor()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(q) => {
                self.bump();
                Ok(Expr::num(q))
            }
            Tok::Op(b'(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_close()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let (_, at) = self.bump();
                if self.peek() == &Tok::Op(b'(') {
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_close()?;
                    if let Some(f) = Func::from_name(&name) {
                        return Ok(Expr::func(f, arg));
                    }
                    if let Some((base, order)) = self.table.generic_call(&name) {
                        return Ok(Expr::generic(&base, order, arg));
                    }
                    return Err(ParseError {
                        kind: ParseErrorKind::UnknownFunction(name),
                        offset: at,
                    });
                }
                if self.table.lookup(&name).is_some() {
                    Ok(Expr::sym(&name))
                } else {
                    Err(ParseError {
                        kind: ParseErrorKind::UnknownSymbol(name),
                        offset: at,
                    })
                }
            }
            Tok::End => self.syntax("unexpected end of input"),
            Tok::Op(c) => self.syntax(&format!("unexpected `{}`", c as char)),
        }
    }

    fn expect_close(&mut self) -> Result<(), ParseError> {
        if self.peek() == &Tok::Op(b')') {
            self.bump();
            Ok(())
        } else {
            self.syntax("expected `)`")
        }
    }
}

/// Parses `text` against the names declared in `table`.
pub fn parse(text: &str, table: &SymbolTable) -> Result<Expr, ParseError> {
    let toks = Lexer { src: text.as_bytes(), pos: 0 }.tokens()?;
    let mut p = Parser { toks, idx: 0, table };
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return p.syntax("trailing input");
    }
    Ok(e)
}

/// Parses a plain decimal or `a/b` literal.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, t) = match t.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, t),
    };
    let q = match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().ok()?;
            let b: BigInt = b.trim().parse().ok()?;
            if b.is_zero() {
                return None;
            }
            BigRational::new(a, b)
        }
        None => match (Lexer { src: t.as_bytes(), pos: 0 }).tokens().ok()?.as_slice() {
            [(Tok::Num(q), _), (Tok::End, _)] => q.clone(),
            _ => return None,
        },
    };
    Some(if neg { -q } else { q })
}

//! Text forms of [`Expr`]: a tagged tree (lossless) and an infix string.
//!
//! Grammars are given in `docs/expression-formats.md`.

use std::fmt::{self, Write as _};

use super::{Alpha, Expr};
use crate::error::{Error, ParseError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `(add (var x) (const 1.5))`
    Tree,
    /// `x+1.5`
    Infix,
}

pub fn serialize<S: Scalar>(expr: &Expr<S>, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Tree => write_tree(expr, &mut out),
        Format::Infix => write_infix(expr, &mut out),
    }
    out
}

pub fn parse<S: Scalar>(text: &str, format: Format) -> Result<Expr<S>> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let e = match format {
        Format::Tree => p.tree()?,
        Format::Infix => p.sum()?,
    };
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(ParseError::new(t.at, "unexpected trailing input").into());
    }
    Ok(e)
}

impl<S: Scalar> fmt::Display for Expr<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self, Format::Infix))
    }
}

fn num<S: Scalar>(v: S, out: &mut String) {
    let _ = write!(out, "{v:?}");
}

fn write_tree<S: Scalar>(e: &Expr<S>, out: &mut String) {
    let mut node = |tag: &str, param: Option<String>, kids: &[&Expr<S>]| {
        out.push('(');
        out.push_str(tag);
        if let Some(p) = param {
            out.push(' ');
            out.push_str(&p);
        }
        for k in kids {
            out.push(' ');
            write_tree(k, out);
        }
        out.push(')');
    };
    let fmt_num = |v: S| format!("{v:?}");
    match e {
        Expr::Const(c) => node("const", Some(fmt_num(*c)), &[]),
        Expr::Var(name) => node("var", Some(name.clone()), &[]),
        Expr::Neg(a) => node("neg", None, &[a]),
        Expr::Add(a, b) => node("add", None, &[a, b]),
        Expr::Sub(a, b) => node("sub", None, &[a, b]),
        Expr::Mul(a, b) => node("mul", None, &[a, b]),
        Expr::Pow(a, n) => node("pow", Some(n.to_string()), &[a]),
        Expr::Sqrt(a) => node("sqrt", None, &[a]),
        Expr::Abs(a) => node("abs", None, &[a]),
        Expr::Min(a, b) => node("min", None, &[a, b]),
        Expr::Max(a, b) => node("max", None, &[a, b]),
        Expr::RAnd(al, a, b) => node("rand", Some(fmt_num(al.get())), &[a, b]),
        Expr::ROr(al, a, b) => node("ror", Some(fmt_num(al.get())), &[a, b]),
    }
}

fn is_negative_const<S: Scalar>(e: &Expr<S>) -> bool {
    matches!(e, Expr::Const(c) if c.is_sign_negative())
}

/// Operand of an infix operator: compound operator nodes and negative
/// constants are parenthesized, atoms and calls are not.
fn write_operand<S: Scalar>(e: &Expr<S>, out: &mut String) {
    let wrap = matches!(e, Expr::Add(..) | Expr::Sub(..) | Expr::Mul(..) | Expr::Neg(_)) || is_negative_const(e);
    if wrap {
        out.push('(');
        write_infix(e, out);
        out.push(')');
    } else {
        write_infix(e, out);
    }
}

fn write_call<S: Scalar>(name: &str, args: &[&Expr<S>], extra: Option<S>, out: &mut String) {
    out.push_str(name);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write_infix(a, out);
    }
    if let Some(x) = extra {
        out.push(',');
        num(x, out);
    }
    out.push(')');
}

fn write_infix<S: Scalar>(e: &Expr<S>, out: &mut String) {
    let mut binary = |a: &Expr<S>, op: char, b: &Expr<S>| {
        write_operand(a, out);
        out.push(op);
        write_operand(b, out);
    };
    match e {
        Expr::Const(c) => num(*c, out),
        Expr::Var(name) => out.push_str(name),
        Expr::Neg(a) => {
            out.push('-');
            write_operand(a, out);
        }
        Expr::Add(a, b) => binary(a, '+', b),
        Expr::Sub(a, b) => binary(a, '-', b),
        Expr::Mul(a, b) => binary(a, '*', b),
        Expr::Pow(a, n) => {
            if matches!(**a, Expr::Pow(..)) {
                out.push('(');
                write_infix(a, out);
                out.push(')');
            } else {
                write_operand(a, out);
            }
            let _ = write!(out, "^{n}");
        }
        Expr::Sqrt(a) => write_call("sqrt", &[a], None, out),
        Expr::Abs(a) => write_call("abs", &[a], None, out),
        Expr::Min(a, b) => write_call("min", &[a, b], None, out),
        Expr::Max(a, b) => write_call("max", &[a, b], None, out),
        Expr::RAnd(al, a, b) => write_call("rand", &[a, b], Some(al.get()), out),
        Expr::ROr(al, a, b) => write_call("ror", &[a, b], Some(al.get()), out),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    LParen,
    RParen,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    at: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'^' => Some(Tok::Caret),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, at: start });
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push(Token { tok: Tok::Num(text[start..i].to_string()), at: start });
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(text[start..i].to_string()), at: start });
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            return Err(ParseError::new(start, format!("unexpected character `{ch}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |t| t.at)
    }

    fn err<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::Parse(ParseError::new(self.here(), reason)))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn number<S: Scalar>(&mut self) -> Result<S> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let at = self.here();
        match self.next() {
            Some(Tok::Num(s)) => {
                let v: S =
                    s.parse().map_err(|_| Error::Parse(ParseError::new(at, format!("malformed number `{s}`"))))?;
                Ok(if negative { -v } else { v })
            }
            _ => Err(ParseError::new(at, "expected number").into()),
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        let at = self.here();
        match self.next() {
            Some(Tok::Num(s)) => {
                s.parse::<u32>().map_err(|_| ParseError::new(at, "exponent must be a non-negative integer").into())
            }
            _ => Err(ParseError::new(at, "expected integer exponent").into()),
        }
    }

    fn alpha<S: Scalar>(&mut self) -> Result<Alpha<S>> {
        let at = self.here();
        let v = self.number()?;
        Alpha::new(v).map_err(|_| ParseError::new(at, "alpha outside (-1, 1]").into())
    }

    fn tree<S: Scalar>(&mut self) -> Result<Expr<S>> {
        self.expect(Tok::LParen, "`(`")?;
        let tag = match self.next() {
            Some(Tok::Ident(tag)) => tag,
            _ => {
                self.pos -= 1;
                return self.err("expected node tag");
            }
        };
        let kid = |p: &mut Self| p.tree::<S>().map(Box::new);
        let e = match tag.as_str() {
            "const" => Expr::Const(self.number()?),
            "var" => match self.next() {
                Some(Tok::Ident(n)) => Expr::Var(n),
                _ => {
                    self.pos -= 1;
                    return self.err("expected variable name");
                }
            },
            "neg" => Expr::Neg(kid(self)?),
            "add" => Expr::Add(kid(self)?, kid(self)?),
            "sub" => Expr::Sub(kid(self)?, kid(self)?),
            "mul" => Expr::Mul(kid(self)?, kid(self)?),
            "pow" => {
                let n = self.exponent()?;
                Expr::Pow(kid(self)?, n)
            }
            "sqrt" => Expr::Sqrt(kid(self)?),
            "abs" => Expr::Abs(kid(self)?),
            "min" => Expr::Min(kid(self)?, kid(self)?),
            "max" => Expr::Max(kid(self)?, kid(self)?),
            "rand" => {
                let al = self.alpha()?;
                Expr::RAnd(al, kid(self)?, kid(self)?)
            }
            "ror" => {
                let al = self.alpha()?;
                Expr::ROr(al, kid(self)?, kid(self)?)
            }
            other => {
                self.pos -= 1;
                return self.err(format!("unknown node tag `{other}`"));
            }
        };
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn sum<S: Scalar>(&mut self) -> Result<Expr<S>> {
        let mut lhs = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = lhs + self.product()?;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = lhs - self.product()?;
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn product<S: Scalar>(&mut self) -> Result<Expr<S>> {
        let mut lhs = self.unary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = lhs * self.unary()?;
        }
        Ok(lhs)
    }

    fn unary<S: Scalar>(&mut self) -> Result<Expr<S>> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(match self.unary::<S>()? {
                Expr::Const(c) if !c.is_sign_negative() => Expr::Const(-c),
                e => -e,
            });
        }
        self.power()
    }

    fn power<S: Scalar>(&mut self) -> Result<Expr<S>> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let n = self.exponent()?;
            return Ok(base.pow(n));
        }
        Ok(base)
    }

    fn primary<S: Scalar>(&mut self) -> Result<Expr<S>> {
        let at = self.here();
        match self.next() {
            Some(Tok::Num(s)) => {
                s.parse().map(Expr::Const).map_err(|_| ParseError::new(at, format!("malformed number `{s}`")).into())
            }
            Some(Tok::LParen) => {
                let e = self.sum()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if self.peek() != Some(&Tok::LParen) {
                    return Ok(Expr::Var(name));
                }
                self.pos += 1;
                let e = match name.as_str() {
                    "sqrt" => self.sum()?.sqrt(),
                    "abs" => self.sum()?.abs(),
                    "min" | "max" => {
                        let a = self.sum()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let b = self.sum()?;
                        if name == "min" {
                            a.min(b)
                        } else {
                            a.max(b)
                        }
                    }
                    "rand" | "ror" => {
                        let a = Box::new(self.sum()?);
                        self.expect(Tok::Comma, "`,`")?;
                        let b = Box::new(self.sum()?);
                        self.expect(Tok::Comma, "`,`")?;
                        let al = self.alpha()?;
                        if name == "rand" {
                            Expr::RAnd(al, a, b)
                        } else {
                            Expr::ROr(al, a, b)
                        }
                    }
                    _ => return Err(ParseError::new(at, format!("unknown function `{name}`")).into()),
                };
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(ParseError::new(at, "expected number, variable or `(`").into()),
        }
    }
}

//! Recursive-descent parser for the ASCII MITL syntax.
//!
//! ```text
//! formula  := until
//! until    := or ( 'U' interval? until )?
//! or       := and ( '|' and )*
//! and      := unary ( '&' unary )*
//! unary    := '!' unary | ('X' | 'F' | 'G') interval? unary | primary
//! primary  := 'true' | 'false' | ident | '(' formula ')'
//! interval := ('[' | '(') number ',' ( number | 'inf' ) (']' | ')')
//! ```
//!
//! Binding strength, tightest first: prefix operators, `&`, `|`, `U`.
//! An omitted interval means `[0,inf)`.

use std::fmt;

use crate::formula::Formula;
use crate::interval::Interval;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntaxError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: SyntaxErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SyntaxErrorKind {
    Unexpected {
        found: String,
        expected: Vec<&'static str>,
    },
    BadInterval(String),
}

impl std::error::Error for SyntaxError {}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SyntaxErrorKind::Unexpected { found, expected } => write!(
                f,
                "syntax error at byte {}: found {found}, expected one of: {}",
                self.offset,
                expected.join(", ")
            ),
            SyntaxErrorKind::BadInterval(msg) => {
                write!(f, "invalid interval at byte {}: {msg}", self.offset)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Inf,
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Eventually,
    Always,
    Until,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Inf => "`inf`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Next => "`X`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Always => "`G`".into(),
            Tok::Until => "`U`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

const OPERAND: &[&str] = &["identifier", "true", "false", "!", "X", "F", "G", "("];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let text = &src[start..i];
                let value = text.parse::<f64>().map_err(|_| SyntaxError {
                    offset: start,
                    kind: SyntaxErrorKind::Unexpected {
                        found: format!("malformed number `{text}`"),
                        expected: vec!["number"],
                    },
                })?;
                out.push((start, Tok::Number(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let tok = match &src[start..i] {
                    "X" => Tok::Next,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    "U" => Tok::Until,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "inf" => Tok::Inf,
                    word => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(SyntaxError {
                    offset: start,
                    kind: SyntaxErrorKind::Unexpected {
                        found: format!("character `{ch}`"),
                        expected: OPERAND.to_vec(),
                    },
                });
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let tok = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        tok
    }

    fn unexpected(&self, expected: &[&'static str]) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            kind: SyntaxErrorKind::Unexpected {
                found: self.peek().describe(),
                expected: expected.to_vec(),
            },
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let interval = self.opt_interval()?;
            let rhs = self.formula()?;
            return Ok(Formula::until(interval, lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Next | Tok::Eventually | Tok::Always => {
                let op = self.bump();
                let interval = self.opt_interval()?;
                let body = self.unary()?;
                Ok(match op {
                    Tok::Next => Formula::next(interval, body),
                    Tok::Eventually => Formula::eventually(interval, body),
                    _ => Formula::always(interval, body),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Formula::Atom(name))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }

    /// An interval opens with `[` or `(`. A `(` directly after an operator
    /// starts an interval only if it is followed by a number; otherwise it
    /// is a parenthesised operand.
    fn opt_interval(&mut self) -> Result<Interval, SyntaxError> {
        let opens = match self.peek() {
            Tok::LBracket => true,
            Tok::LParen => matches!(self.toks.get(self.pos + 1), Some((_, Tok::Number(_)))),
            _ => false,
        };
        if !opens {
            return Ok(Interval::unrestricted());
        }
        let start = self.offset();
        let lo_closed = self.bump() == Tok::LBracket;
        let lo = match self.peek() {
            Tok::Number(n) => *n,
            _ => return Err(self.unexpected(&["number"])),
        };
        self.bump();
        self.expect(Tok::Comma, ",")?;
        let hi = match self.peek() {
            Tok::Number(n) => *n,
            Tok::Inf => f64::INFINITY,
            _ => return Err(self.unexpected(&["number", "inf"])),
        };
        self.bump();
        let hi_closed = match self.peek() {
            Tok::RBracket if hi.is_finite() => true,
            Tok::RParen => false,
            _ if hi.is_finite() => return Err(self.unexpected(&["]", ")"])),
            _ => return Err(self.unexpected(&[")"])),
        };
        self.bump();
        Interval::new(lo, lo_closed, hi, hi_closed).map_err(|e| SyntaxError {
            offset: start,
            kind: SyntaxErrorKind::BadInterval(e.to_string()),
        })
    }
}

pub fn parse(src: &str) -> Result<Formula, SyntaxError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["&", "|", "U", "end of input"]));
    }
    Ok(f)
}

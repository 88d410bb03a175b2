//! Boolean oracle expressions.
//!
//! Operators by decreasing precedence: NOT (`¬ ! ~`), AND (`∧ & *`),
//! XOR (`⊕ ^`), OR (`∨ | +`). Operands are variable names, the constants
//! `0` and `1`, or parenthesized expressions. A multi-output oracle is a
//! `;`-separated list of `label=expr` items.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("oracle column {column}: {message}")]
pub struct OracleError {
    pub column: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Var(String),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn parse(text: &str) -> Result<BoolExpr, OracleError> {
        let toks = lex(text)?;
        let mut p = Parser { toks: &toks, pos: 0, len: text.chars().count() };
        let e = p.or()?;
        match p.toks.get(p.pos) {
            None => Ok(e),
            Some((col, t)) => Err(OracleError {
                column: *col,
                message: format!("unexpected {t}"),
            }),
        }
    }

    /// Evaluates with `vars`; a missing variable is reported by name.
    pub fn eval(&self, vars: &HashMap<&str, bool>) -> Result<bool, String> {
        Ok(match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(v) => *vars.get(v.as_str()).ok_or_else(|| v.clone())?,
            BoolExpr::Not(e) => !e.eval(vars)?,
            BoolExpr::And(a, b) => a.eval(vars)? & b.eval(vars)?,
            BoolExpr::Xor(a, b) => a.eval(vars)? ^ b.eval(vars)?,
            BoolExpr::Or(a, b) => a.eval(vars)? | b.eval(vars)?,
        })
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(v) => {
                out.insert(v.clone());
            }
            BoolExpr::Not(e) => e.collect(out),
            BoolExpr::And(a, b) | BoolExpr::Xor(a, b) | BoolExpr::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Const(b) => write!(f, "{}", u8::from(*b)),
            BoolExpr::Var(v) => f.write_str(v),
            BoolExpr::Not(e) => write!(f, "!{e}"),
            BoolExpr::And(a, b) => write!(f, "({a} & {b})"),
            BoolExpr::Xor(a, b) => write!(f, "({a} ^ {b})"),
            BoolExpr::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

/// One expression per output, optionally labelled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    pub outputs: Vec<(Option<String>, BoolExpr)>,
}

impl Oracle {
    pub fn parse(text: &str) -> Result<Oracle, OracleError> {
        let mut outputs = Vec::new();
        let mut offset = 0;
        for part in text.split(';') {
            let width = part.chars().count() + 1;
            let trimmed = part.trim();
            if trimmed.is_empty() {
                return Err(OracleError {
                    column: offset + 1,
                    message: "empty expression".into(),
                });
            }
            let (label, body, skip) = match part.split_once('=') {
                Some((l, b)) if is_name(l.trim()) => {
                    (Some(l.trim().to_string()), b, l.chars().count() + 1)
                }
                _ => (None, part, 0),
            };
            let e = BoolExpr::parse(body).map_err(|e| OracleError {
                column: e.column + offset + skip,
                message: e.message,
            })?;
            outputs.push((label, e));
            offset += width;
        }
        Ok(Oracle { outputs })
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.outputs.iter().flat_map(|(_, e)| e.variables()).collect()
    }
}

impl fmt::Display for Oracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (label, e)) in self.outputs.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            if let Some(l) = label {
                write!(f, "{l}=")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

fn is_name(s: &str) -> bool {
    let mut chars = s.chars();
    chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Const(bool),
    Not,
    And,
    Xor,
    Or,
    Open,
    Close,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(n) => write!(f, "`{n}`"),
            Tok::Const(b) => write!(f, "`{}`", u8::from(*b)),
            Tok::Not => f.write_str("NOT"),
            Tok::And => f.write_str("AND"),
            Tok::Xor => f.write_str("XOR"),
            Tok::Or => f.write_str("OR"),
            Tok::Open => f.write_str("`(`"),
            Tok::Close => f.write_str("`)`"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, OracleError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '¬' | '!' | '~' => Tok::Not,
            '∧' | '&' | '*' => Tok::And,
            '⊕' | '^' => Tok::Xor,
            '∨' | '|' | '+' => Tok::Or,
            '(' => Tok::Open,
            ')' => Tok::Close,
            '0' | '1' if !chars.get(i + 1).is_some_and(|n| n.is_ascii_alphanumeric()) => {
                Tok::Const(c == '1')
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
                {
                    i += 1;
                }
                out.push((col, Tok::Name(chars[start..i].iter().collect())));
                continue;
            }
            other => {
                return Err(OracleError {
                    column: col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push((col, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [(usize, Tok)],
    pos: usize,
    len: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn binary(
        &mut self,
        op: Tok,
        next: fn(&mut Self) -> Result<BoolExpr, OracleError>,
        make: fn(Box<BoolExpr>, Box<BoolExpr>) -> BoolExpr,
    ) -> Result<BoolExpr, OracleError> {
        let mut lhs = next(self)?;
        while self.peek() == Some(&op) {
            self.pos += 1;
            let rhs = next(self)?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<BoolExpr, OracleError> {
        self.binary(Tok::Or, Self::xor, BoolExpr::Or)
    }

    fn xor(&mut self) -> Result<BoolExpr, OracleError> {
        self.binary(Tok::Xor, Self::and, BoolExpr::Xor)
    }

    fn and(&mut self) -> Result<BoolExpr, OracleError> {
        self.binary(Tok::And, Self::unary, BoolExpr::And)
    }

    fn unary(&mut self) -> Result<BoolExpr, OracleError> {
        let Some((col, tok)) = self.toks.get(self.pos).cloned() else {
            return Err(OracleError {
                column: self.len + 1,
                message: "expression ends early".into(),
            });
        };
        self.pos += 1;
        match tok {
            Tok::Not => Ok(BoolExpr::Not(Box::new(self.unary()?))),
            Tok::Name(n) => Ok(BoolExpr::Var(n)),
            Tok::Const(b) => Ok(BoolExpr::Const(b)),
            Tok::Open => {
                let e = self.or()?;
                match self.toks.get(self.pos) {
                    Some((_, Tok::Close)) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(OracleError {
                        column: col,
                        message: "unclosed `(`".into(),
                    }),
                }
            }
            t => Err(OracleError {
                column: col,
                message: format!("expected an operand, found {t}"),
            }),
        }
    }
}

//! Recursive-descent parser.
//!
//! Precedence, tightest first: prefix `~ X G F`, `U` (right), `&`, `|`,
//! `->` (right), `<->` (left). At an atom position the parser first tries a
//! comparison between arithmetic terms and falls back to a parenthesised
//! formula, so `(a + b) > 2` and `(a > 2)` both parse.

use std::fmt;

use super::lexer::{tokenize, Spanned, Tok};
use super::{Atom, LtlFormula, NumExpr, Value, VarRef};

const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset of the offending token (source length at end of input).
    pub position: usize,
    pub expected: Vec<String>,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(position: usize, expected: Vec<String>, message: impl Into<String>) -> Self {
        ParseError { position, expected, message: message.into() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

pub fn parse_ltl(text: &str) -> Result<LtlFormula, ParseError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(ParseError::new(0, vec!["formula".into()], "empty formula"));
    }
    let mut p = Parser { toks: &toks, pos: 0, end: text.len(), depth: 0 };
    let f = p.iff()?;
    if let Some(t) = p.peek() {
        return Err(p.unexpected(t, vec!["end of input".into(), "binary operator".into()]));
    }
    Ok(f)
}

/// One formula from a `.ltl` property file.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyLine {
    /// 1-based line number.
    pub line: usize,
    pub formula: LtlFormula,
}

/// Parses a property file: one formula per line, `#` starts a comment.
pub fn parse_property_file(text: &str) -> Result<Vec<PropertyLine>, (usize, ParseError)> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let formula = parse_ltl(body).map_err(|e| (idx + 1, e))?;
        out.push(PropertyLine { line: idx + 1, formula });
    }
    Ok(out)
}

struct Parser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    end: usize,
    depth: usize,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.toks.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&'a Tok> {
        self.peek().map(|s| &s.tok)
    }

    fn here(&self) -> usize {
        self.peek().map(|s| s.pos).unwrap_or(self.end)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek_tok() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, t: &Spanned, expected: Vec<String>) -> ParseError {
        let mut msg = format!("unexpected {}", t.tok.describe());
        let after_number = self.toks[..self.pos]
            .last()
            .is_some_and(|prev| matches!(prev.tok, Tok::Int(_) | Tok::Float(_)));
        if after_number && matches!(t.tok, Tok::Ident { .. }) {
            msg.push_str("; timed bounds such as `5 seconds` are not supported");
        }
        ParseError::new(t.pos, expected, msg)
    }

    fn fail(&self, expected: &[&str]) -> ParseError {
        let expected = expected.iter().map(|s| s.to_string()).collect();
        match self.peek() {
            Some(t) => self.unexpected(t, expected),
            None => ParseError::new(self.end, expected, "unexpected end of input"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ParseError::new(self.here(), vec![], "formula nested too deeply"));
        }
        Ok(())
    }

    fn iff(&mut self) -> PResult<LtlFormula> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            lhs = LtlFormula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> PResult<LtlFormula> {
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            self.enter()?;
            let rhs = self.implies()?;
            self.depth -= 1;
            return Ok(LtlFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<LtlFormula> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Or) {
            let rhs = self.and()?;
            lhs = LtlFormula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> PResult<LtlFormula> {
        let mut lhs = self.until()?;
        while self.eat(&Tok::And) {
            let rhs = self.until()?;
            lhs = LtlFormula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> PResult<LtlFormula> {
        let lhs = self.unary()?;
        if self.eat(&Tok::Until) {
            self.enter()?;
            let rhs = self.until()?;
            self.depth -= 1;
            return Ok(LtlFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<LtlFormula> {
        let ctor: fn(LtlFormula) -> LtlFormula = match self.peek_tok() {
            Some(Tok::Not) => LtlFormula::not,
            Some(Tok::Next) => LtlFormula::next,
            Some(Tok::Globally) => LtlFormula::globally,
            Some(Tok::Finally) => LtlFormula::finally,
            _ => return self.primary(),
        };
        self.pos += 1;
        self.enter()?;
        let inner = self.unary()?;
        self.depth -= 1;
        Ok(ctor(inner))
    }

    fn primary(&mut self) -> PResult<LtlFormula> {
        self.enter()?;
        let start = self.pos;
        let depth = self.depth;
        let as_atom = self.atom();
        self.depth = depth;
        let result = match as_atom {
            Ok(a) => Ok(LtlFormula::Atom(a)),
            Err(atom_err) if self.toks.get(start).map(|s| &s.tok) == Some(&Tok::LParen) => {
                let atom_pos = self.pos;
                self.pos = start + 1;
                match self.parenthesised() {
                    Ok(f) => Ok(f),
                    Err(paren_err) => {
                        // Report whichever reading got further.
                        if atom_err.position > paren_err.position {
                            self.pos = atom_pos;
                            Err(atom_err)
                        } else {
                            Err(paren_err)
                        }
                    }
                }
            }
            Err(e) => Err(e),
        };
        self.depth -= 1;
        result
    }

    fn parenthesised(&mut self) -> PResult<LtlFormula> {
        let f = self.iff()?;
        if !self.eat(&Tok::RParen) {
            return Err(self.fail(&["`)`", "binary operator"]));
        }
        Ok(f)
    }

    fn atom(&mut self) -> PResult<Atom> {
        let lhs = self.num()?;
        if let Some(Tok::Cmp(op)) = self.peek_tok() {
            self.pos += 1;
            let rhs = self.num()?;
            return Ok(Atom::new(lhs, *op, rhs));
        }
        Ok(Atom::truthy(lhs))
    }

    fn num(&mut self) -> PResult<NumExpr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = NumExpr::add(lhs, self.term()?);
            } else if self.eat(&Tok::Minus) {
                lhs = NumExpr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> PResult<NumExpr> {
        let Some(t) = self.peek() else {
            return Err(self.fail(&["identifier", "literal", "`(`"]));
        };
        let e = match &t.tok {
            Tok::Ident { name, primed } => {
                NumExpr::Var(VarRef { name: name.clone(), primed: *primed })
            }
            Tok::Int(u) => NumExpr::Lit(int_literal(*u)),
            Tok::Float(x) => NumExpr::Lit(Value::Float(*x)),
            Tok::Bool(b) => NumExpr::Lit(Value::Bool(*b)),
            Tok::Minus => {
                let lit = match self.toks.get(self.pos + 1).map(|s| &s.tok) {
                    Some(Tok::Int(u)) if *u <= 1u64 << 63 => Value::Int((*u as i64).wrapping_neg()),
                    Some(Tok::Float(x)) => Value::Float(-x),
                    _ => return Err(self.fail(&["identifier", "literal", "`(`"])),
                };
                self.pos += 2;
                return Ok(NumExpr::Lit(lit));
            }
            Tok::LParen => {
                self.pos += 1;
                self.enter()?;
                let inner = self.num()?;
                self.depth -= 1;
                if !self.eat(&Tok::RParen) {
                    return Err(self.fail(&["`)`", "`+`", "`-`"]));
                }
                return Ok(inner);
            }
            _ => return Err(self.fail(&["identifier", "literal", "`(`"])),
        };
        self.pos += 1;
        Ok(e)
    }
}

fn int_literal(u: u64) -> Value {
    match i64::try_from(u) {
        Ok(i) => Value::Int(i),
        Err(_) => Value::UInt(u),
    }
}

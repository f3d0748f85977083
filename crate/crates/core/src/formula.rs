//! Decision-logic formulas over an information table.
//!
//! Atomic formulas are `(attribute = value)` and `(attribute != value)`;
//! compound formulas use `!`, `&` and `|` with that precedence.
//!
//! ```text
//! formula := or
//! or      := and ('|' and)*
//! and     := not ('&' not)*
//! not     := '!' not | '(' formula ')' | atom
//! atom    := '(' name rel name ')'
//! rel     := '=' | '!='
//! name    := bare-word+ | double-quoted string
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SyntaxError};
use crate::table::{InformationTable, ObjectIdSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "!=")]
    Neq,
}

impl Relation {
    pub const ALL: [Relation; 2] = [Relation::Eq, Relation::Neq];

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Eq => "=",
            Relation::Neq => "!=",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomicFormula {
    pub attribute: String,
    pub relation: Relation,
    pub value: String,
}

impl AtomicFormula {
    pub fn eq(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        AtomicFormula {
            attribute: attribute.into(),
            relation: Relation::Eq,
            value: value.into(),
        }
    }

    pub fn neq(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        AtomicFormula {
            attribute: attribute.into(),
            relation: Relation::Neq,
            value: value.into(),
        }
    }
}

impl fmt::Display for AtomicFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {} {})",
            render_name(&self.attribute),
            self.relation,
            render_name(&self.value)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(AtomicFormula),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
}

impl From<AtomicFormula> for Formula {
    fn from(a: AtomicFormula) -> Self {
        Formula::Atom(a)
    }
}

impl Formula {
    pub fn eq(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Formula::Atom(AtomicFormula::eq(attribute, value))
    }

    pub fn neq(attribute: impl Into<String>, value: impl Into<String>) -> Self {
        Formula::Atom(AtomicFormula::neq(attribute, value))
    }

    pub fn and(self, other: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    /// Left-nested disjunction of `(attribute = v)` over `values`.
    /// Returns `None` for an empty value list.
    pub fn any_of<'a>(attribute: &str, values: impl IntoIterator<Item = &'a str>) -> Option<Self> {
        values
            .into_iter()
            .map(|v| Formula::eq(attribute, v))
            .reduce(Formula::or)
    }

    /// If `self` is a disjunction of equality atoms on a single attribute,
    /// returns that attribute and the values in left-to-right order.
    pub fn as_attribute_disjunction(&self) -> Option<(&str, Vec<&str>)> {
        fn collect<'f>(
            f: &'f Formula,
            attribute: &mut Option<&'f str>,
            out: &mut Vec<&'f str>,
        ) -> bool {
            match f {
                Formula::Atom(a) if a.relation == Relation::Eq => {
                    if *attribute.get_or_insert(&a.attribute) != a.attribute {
                        return false;
                    }
                    out.push(&a.value);
                    true
                }
                Formula::Or(l, r) => collect(l, attribute, out) && collect(r, attribute, out),
                _ => false,
            }
        }
        let mut attribute = None;
        let mut values = Vec::new();
        if collect(self, &mut attribute, &mut values) {
            attribute.map(|a| (a, values))
        } else {
            None
        }
    }

    pub fn atoms(&self) -> Vec<&AtomicFormula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                Formula::Atom(a) => out.push(a),
                Formula::And(l, r) | Formula::Or(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                Formula::Not(inner) => stack.push(inner),
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.depth().max(r.depth()),
            Formula::Not(inner) => 1 + inner.depth(),
        }
    }

    /// Deterministic fully parenthesized rendering. Equal formulas render
    /// identically and the output parses back to the same tree.
    pub fn canonical_text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::And(l, r) => write!(f, "({l} & {r})"),
            Formula::Or(l, r) => write!(f, "({l} | {r})"),
            Formula::Not(inner) => write!(f, "!{inner}"),
        }
    }
}

impl std::str::FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, SyntaxError> {
        parse_formula(s)
    }
}

fn is_bare_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '&' | '|' | '!' | '=' | '"' | '\\')
}

fn render_name(name: &str) -> String {
    if !name.is_empty() && name.chars().all(is_bare_char) {
        return name.to_string();
    }
    let mut out = String::with_capacity(name.len() + 2);
    out.push('"');
    for c in name.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

pub fn canonical_text(f: &Formula) -> String {
    f.canonical_text()
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Bang,
    Eq,
    Neq,
    Word(String),
    Quoted(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::And => "'&'".into(),
            Token::Or => "'|'".into(),
            Token::Bang => "'!'".into(),
            Token::Eq => "'='".into(),
            Token::Neq => "'!='".into(),
            Token::Word(w) => format!("name {w:?}"),
            Token::Quoted(w) => format!("string {w:?}"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(offset, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | '&' | '|' | '=' => {
                chars.next();
                let t = match c {
                    '(' => Token::LParen,
                    ')' => Token::RParen,
                    '&' => Token::And,
                    '|' => Token::Or,
                    _ => Token::Eq,
                };
                tokens.push((offset, t));
            }
            '!' => {
                chars.next();
                if let Some(&(_, '=')) = chars.peek() {
                    chars.next();
                    tokens.push((offset, Token::Neq));
                } else {
                    tokens.push((offset, Token::Bang));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, '\\')) => match chars.next() {
                            Some((_, e)) => s.push(e),
                            None => {
                                return Err(SyntaxError {
                                    offset: text.len(),
                                    expected: vec!["'\"'"],
                                    found: "end of input".into(),
                                })
                            }
                        },
                        Some((_, ch)) => s.push(ch),
                        None => {
                            return Err(SyntaxError {
                                offset: text.len(),
                                expected: vec!["'\"'"],
                                found: "end of input".into(),
                            })
                        }
                    }
                }
                tokens.push((offset, Token::Quoted(s)));
            }
            '\\' => {
                return Err(SyntaxError {
                    offset,
                    expected: vec!["'('", "'!'"],
                    found: "'\\'".into(),
                })
            }
            _ => {
                let start = offset;
                let mut end = offset;
                while let Some(&(i, ch)) = chars.peek() {
                    if !is_bare_char(ch) {
                        break;
                    }
                    end = i + ch.len_utf8();
                    chars.next();
                }
                tokens.push((start, Token::Word(text[start..end].to_string())));
            }
        }
    }
    Ok(tokens)
}

struct Parser<'t> {
    tokens: &'t [(usize, Token)],
    pos: usize,
    end: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'t Token> {
        self.tokens.get(self.pos + ahead).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn error(&self, expected: Vec<&'static str>) -> SyntaxError {
        SyntaxError {
            offset: self.offset(),
            expected,
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), Token::describe),
        }
    }

    fn expect(&mut self, token: Token, label: &'static str) -> Result<(), SyntaxError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(vec![label]))
        }
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            lhs = lhs.or(self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut lhs = self.not()?;
        while self.peek() == Some(&Token::And) {
            self.pos += 1;
            lhs = lhs.and(self.not()?);
        }
        Ok(lhs)
    }

    fn not(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek() {
            Some(Token::Bang) => {
                self.pos += 1;
                Ok(self.not()?.not())
            }
            Some(Token::LParen) => {
                if matches!(self.peek_at(1), Some(Token::Word(_) | Token::Quoted(_))) {
                    self.atom()
                } else {
                    self.pos += 1;
                    let inner = self.or()?;
                    self.expect(Token::RParen, "')'")?;
                    Ok(inner)
                }
            }
            _ => Err(self.error(vec!["'('", "'!'"])),
        }
    }

    fn atom(&mut self) -> Result<Formula, SyntaxError> {
        self.expect(Token::LParen, "'('")?;
        let attribute = self.name()?;
        let relation = match self.peek() {
            Some(Token::Eq) => Relation::Eq,
            Some(Token::Neq) => Relation::Neq,
            _ => return Err(self.error(vec!["'='", "'!='"])),
        };
        self.pos += 1;
        let value = self.name()?;
        self.expect(Token::RParen, "')'")?;
        Ok(Formula::Atom(AtomicFormula {
            attribute,
            relation,
            value,
        }))
    }

    /// A quoted string, or one or more bare words joined by single spaces.
    fn name(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Some(Token::Quoted(s)) => {
                self.pos += 1;
                Ok(s.clone())
            }
            Some(Token::Word(_)) => {
                let mut words = Vec::new();
                while let Some(Token::Word(w)) = self.peek() {
                    words.push(w.as_str());
                    self.pos += 1;
                }
                Ok(words.join(" "))
            }
            _ => Err(self.error(vec!["name"])),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let f = parser.or()?;
    if parser.pos < tokens.len() {
        return Err(parser.error(vec!["'&'", "'|'", "end of input"]));
    }
    Ok(f)
}

/// Meaning set `m(f)`: the objects of `table` satisfying `f`.
///
/// A missing cell satisfies neither `(a = v)` nor `(a != v)`.
pub fn evaluate(f: &Formula, table: &InformationTable) -> Result<ObjectIdSet> {
    let mask = evaluate_mask(f, table)?;
    Ok(table
        .universe()
        .iter()
        .zip(mask)
        .filter(|(_, hit)| *hit)
        .map(|(id, _)| id.clone())
        .collect())
}

/// Characteristic vector of `m(f)` over the table's universe order.
pub fn evaluate_mask(f: &Formula, table: &InformationTable) -> Result<Vec<bool>> {
    match f {
        Formula::Atom(a) => {
            let column = table.attribute_position(&a.attribute)?;
            if !table.supports(&a.attribute, a.relation)? {
                return Err(Error::UnsupportedRelation {
                    attribute: a.attribute.clone(),
                    relation: a.relation.to_string(),
                });
            }
            Ok((0..table.len())
                .map(|row| {
                    let cell = table.cell(row, column);
                    match a.relation {
                        Relation::Eq => cell.contains(&a.value),
                        Relation::Neq => !cell.is_empty() && !cell.contains(&a.value),
                    }
                })
                .collect())
        }
        Formula::And(l, r) => {
            let mut lhs = evaluate_mask(l, table)?;
            let rhs = evaluate_mask(r, table)?;
            lhs.iter_mut().zip(rhs).for_each(|(x, y)| *x &= y);
            Ok(lhs)
        }
        Formula::Or(l, r) => {
            let mut lhs = evaluate_mask(l, table)?;
            let rhs = evaluate_mask(r, table)?;
            lhs.iter_mut().zip(rhs).for_each(|(x, y)| *x |= y);
            Ok(lhs)
        }
        Formula::Not(inner) => {
            let mut mask = evaluate_mask(inner, table)?;
            mask.iter_mut().for_each(|x| *x = !*x);
            Ok(mask)
        }
    }
}

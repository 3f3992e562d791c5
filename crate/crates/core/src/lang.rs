//! Text form of information expressions.
//!
//! ```text
//! expr  := "0" | [sign] term (sign term)*
//! term  := [coef "*"] atom
//! atom  := "H(" vars ["|" vars] ")" | "I(" vars ";" vars ["|" vars] ")"
//! vars  := name ("," name)*
//! coef  := integer | integer "/" integer | decimal
//! sign  := "+" | "-"
//! ```
//!
//! Names are identifiers (`[A-Za-z_][A-Za-z0-9_]*`). Whitespace is allowed
//! between tokens.

use std::cell::RefCell;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::expr::{ExprError, InfoExpression, Quantity, TermSum};
use crate::rational::{format_exact, int, parse_decimal, parse_exact, Rational};
use crate::varset::{VarSet, MAX_VARS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<&'static str>,
        found: String,
    },
    #[error("unknown variable `{name}` at {position}")]
    UnknownVariable { name: String, position: usize },
    #[error("overlapping variable subsets in term at {position}")]
    OverlappingSubsets { position: usize },
    #[error("too many variables (at most {MAX_VARS})")]
    TooManyVariables,
}

struct Parser<'t, R> {
    text: &'t str,
    pos: usize,
    resolve: R,
}

impl<'t, R: Fn(&str) -> Option<usize>> Parser<'t, R> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn error(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            position: self.pos,
            expected,
            found: match self.peek() {
                Some(c) => format!("`{c}`"),
                None => "end of input".to_string(),
            },
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char, label: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(vec![label]))
        }
    }

    fn expr(&mut self) -> Result<TermSum, ParseError> {
        let mut sum = TermSum::new();
        self.skip_ws();
        let mut sign = if self.eat('-') {
            -1
        } else {
            self.eat('+');
            1
        };
        loop {
            if let Some((coef, q)) = self.term()? {
                sum.terms.push((coef * int(sign), q));
            }
            self.skip_ws();
            if self.eat('+') {
                sign = 1;
            } else if self.eat('-') {
                sign = -1;
            } else if self.peek().is_none() {
                return Ok(sum);
            } else {
                return Err(self.error(vec!["`+`", "`-`", "end of input"]));
            }
        }
    }

    /// `None` for a literal zero term.
    fn term(&mut self) -> Result<Option<(Rational, Quantity)>, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let coef = self.coef()?;
                if self.eat('*') {
                    Ok(Some((coef, self.atom()?)))
                } else if coef.is_zero() {
                    Ok(None)
                } else {
                    Err(self.error(vec!["`*`"]))
                }
            }
            _ => Ok(Some((int(1), self.atom()?))),
        }
    }

    fn coef(&mut self) -> Result<Rational, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.peek().is_some_and(|c| c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos > s
        };
        let int_part = digits(self);
        if self.peek() == Some('.') {
            self.pos += 1;
            let frac = digits(self);
            if !int_part && !frac {
                return Err(self.error(vec!["digit"]));
            }
            return parse_decimal(&self.text[start..self.pos])
                .map_err(|_| self.error(vec!["number"]));
        }
        if !int_part {
            return Err(self.error(vec!["number"]));
        }
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some('/') {
            self.pos += 1;
            self.skip_ws();
            let den_start = self.pos;
            if !digits(self) {
                return Err(self.error(vec!["denominator"]));
            }
            let num = &self.text[start..save];
            let den = &self.text[den_start..self.pos];
            let r = parse_exact(&format!("{num}/{den}")).map_err(|_| ParseError::Syntax {
                position: den_start,
                expected: vec!["non-zero denominator"],
                found: "`0`".to_string(),
            })?;
            return Ok(r);
        }
        self.pos = save;
        parse_exact(&self.text[start..save]).map_err(|_| self.error(vec!["number"]))
    }

    fn atom(&mut self) -> Result<Quantity, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some('H') => {
                self.pos += 1;
                self.expect('(', "`(`")?;
                let of = self.vars()?;
                let given = if self.eat('|') { self.vars()? } else { VarSet::EMPTY };
                self.expect(')', "`)` or `|`")?;
                let q = Quantity::entropy(of, given);
                self.check(&q, start)?;
                Ok(q)
            }
            Some('I') => {
                self.pos += 1;
                self.expect('(', "`(`")?;
                let left = self.vars()?;
                self.expect(';', "`;`")?;
                let right = self.vars()?;
                let given = if self.eat('|') { self.vars()? } else { VarSet::EMPTY };
                self.expect(')', "`)` or `|`")?;
                let q = Quantity::mutual_info(left, right, given);
                self.check(&q, start)?;
                Ok(q)
            }
            _ => Err(self.error(vec!["`H(`", "`I(`", "coefficient"])),
        }
    }

    fn check(&self, q: &Quantity, position: usize) -> Result<(), ParseError> {
        match q.validate(MAX_VARS) {
            Err(ExprError::OverlappingSubsets) => Err(ParseError::OverlappingSubsets { position }),
            _ => Ok(()),
        }
    }

    fn vars(&mut self) -> Result<VarSet, ParseError> {
        let start = self.pos;
        let mut s = VarSet::EMPTY;
        loop {
            let (name, at) = self.name()?;
            let i = (self.resolve)(name).ok_or_else(|| ParseError::UnknownVariable {
                name: name.to_string(),
                position: at,
            })?;
            if i >= MAX_VARS {
                return Err(ParseError::TooManyVariables);
            }
            if s.contains(i) {
                return Err(ParseError::OverlappingSubsets { position: start });
            }
            s = s | VarSet::singleton(i);
            if !self.eat(',') {
                return Ok(s);
            }
        }
    }

    fn name(&mut self) -> Result<(&'t str, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.error(vec!["variable name"])),
        }
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        Ok((&self.text[start..self.pos], start))
    }
}

/// Parses into the weighted quantities as written.
pub fn parse_terms<S: AsRef<str>>(text: &str, order: &[S]) -> Result<TermSum, ParseError> {
    let mut p = Parser {
        text,
        pos: 0,
        resolve: |name: &str| order.iter().position(|n| n.as_ref() == name),
    };
    p.expr()
}

/// Parses into canonical form over the declared variable order.
pub fn parse<S: AsRef<str>>(text: &str, order: &[S]) -> Result<InfoExpression, ParseError> {
    let terms = parse_terms(text, order)?;
    Ok(terms
        .canonical(order.len())
        .expect("parser validated every quantity"))
}

/// Parses with the variable order taken to be the sorted set of names that
/// occur in the text.
pub fn parse_inferred(text: &str) -> Result<(Vec<String>, TermSum), ParseError> {
    let seen: RefCell<Vec<String>> = RefCell::new(Vec::new());
    {
        let mut p = Parser {
            text,
            pos: 0,
            resolve: |name: &str| {
                let mut seen = seen.borrow_mut();
                Some(seen.iter().position(|n| n == name).unwrap_or_else(|| {
                    seen.push(name.to_string());
                    seen.len() - 1
                }))
            },
        };
        p.expr()?;
    }
    let mut names = seen.into_inner();
    names.sort();
    let terms = parse_terms(text, &names)?;
    Ok((names, terms))
}

/// Deterministic text: terms in coordinate order, exact coefficients.
pub fn print_canonical<S: AsRef<str>>(e: &InfoExpression, names: &[S]) -> String {
    let mut out = String::new();
    for (k, (s, c)) in e.terms().enumerate() {
        let neg = c.is_negative();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mag = c.abs();
        if mag != int(1) {
            out.push_str(&format_exact(&mag));
            out.push('*');
        }
        out.push_str("H(");
        out.push_str(&s.names(names));
        out.push(')');
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

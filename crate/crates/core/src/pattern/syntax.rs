//! Surface syntax.
//!
//! ```text
//! pattern    := concat ('|' concat)*
//! concat     := quantified+
//! quantified := atom ('?' | '*' | '+')?
//! atom       := '[' constraint? ']' | '(' pattern ')' | 'HOLE'
//! constraint := and ('|' and)*
//! and        := unary ('&' unary)*
//! unary      := '!' unary | '(' constraint ')' | 'HOLE' | 'ANY' | field '=' value
//! value      := bare | '"' escaped '"'
//! ```
//!
//! `[]` is the wildcard token; inside a larger constraint the wildcard is
//! spelled `ANY`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Constraint, Field, Pattern, Quantifier};
use crate::{Error, Result};

const SPECIAL: &[char] = &['[', ']', '(', ')', '|', '&', '!', '=', '"', '?', '*', '+', '\\'];

fn needs_quotes(value: &str) -> bool {
    value.is_empty() || !value.chars().all(|c| c.is_alphanumeric() || c == '_')
}

fn push_value(out: &mut String, value: &str) {
    if needs_quotes(value) {
        out.push('"');
        for c in value.chars() {
            if c == '"' || c == '\\' {
                out.push('\\');
            }
            out.push(c);
        }
        out.push('"');
    } else {
        out.push_str(value);
    }
}

pub(crate) fn print(p: &Pattern) -> String {
    let mut out = String::new();
    print_alt(p, &mut out);
    out
}

pub(crate) fn print_constraint(c: &Constraint) -> String {
    let mut out = String::new();
    print_or(c, &mut out);
    out
}

fn print_alt(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Alternation(l, r) => {
            if matches!(**l, Pattern::Alternation(..)) {
                print_group(l, out);
            } else {
                print_concat(l, out);
            }
            out.push('|');
            print_alt(r, out);
        }
        other => print_concat(other, out),
    }
}

fn print_concat(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Concat(l, r) => {
            if matches!(**l, Pattern::Concat(..)) {
                print_group(l, out);
            } else {
                print_concat(l, out);
            }
            out.push(' ');
            print_concat(r, out);
        }
        Pattern::Alternation(..) => print_group(p, out),
        other => print_quantified(other, out),
    }
}

fn print_quantified(p: &Pattern, out: &mut String) {
    match p {
        Pattern::Quantified(child, q) => {
            match **child {
                Pattern::Hole | Pattern::Token(_) => print_quantified(child, out),
                _ => print_group(child, out),
            }
            out.push(q.symbol());
        }
        Pattern::Hole => out.push_str("HOLE"),
        Pattern::Token(Constraint::Wildcard) => out.push_str("[]"),
        Pattern::Token(c) => {
            out.push('[');
            print_or(c, out);
            out.push(']');
        }
        other => print_group(other, out),
    }
}

fn print_group(p: &Pattern, out: &mut String) {
    out.push('(');
    print_alt(p, out);
    out.push(')');
}

fn print_or(c: &Constraint, out: &mut String) {
    match c {
        Constraint::Or(l, r) => {
            if matches!(**l, Constraint::Or(..)) {
                print_constraint_group(l, out);
            } else {
                print_and(l, out);
            }
            out.push_str(" | ");
            print_or(r, out);
        }
        other => print_and(other, out),
    }
}

fn print_and(c: &Constraint, out: &mut String) {
    match c {
        Constraint::And(l, r) => {
            if matches!(**l, Constraint::And(..)) {
                print_constraint_group(l, out);
            } else {
                print_and(l, out);
            }
            out.push_str(" & ");
            print_and(r, out);
        }
        Constraint::Or(..) => print_constraint_group(c, out),
        other => print_unary(other, out),
    }
}

fn print_unary(c: &Constraint, out: &mut String) {
    match c {
        Constraint::Hole => out.push_str("HOLE"),
        Constraint::Wildcard => out.push_str("ANY"),
        Constraint::FieldIs(f, v) => {
            out.push_str(f.name());
            out.push('=');
            push_value(out, v);
        }
        Constraint::Not(x) => {
            out.push('!');
            print_unary(x, out);
        }
        other => print_constraint_group(other, out),
    }
}

fn print_constraint_group(c: &Constraint, out: &mut String) {
    out.push('(');
    print_or(c, out);
    out.push(')');
}

/// Parses a rule. Values are lowercased; field names and the `HOLE` / `ANY`
/// keywords are matched as written (field names case-insensitively).
pub fn parse(text: &str) -> Result<Pattern> {
    let mut p = Parser { chars: text.char_indices().collect(), pos: 0, len: text.len() };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty rule"));
    }
    let pattern = p.pattern()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(pattern)
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(o, _)| o)
    }

    fn error(&self, message: &str) -> Error {
        Error::Syntax { offset: self.offset(), message: message.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
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

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn keyword(&mut self, word: &str) -> bool {
        self.skip_ws();
        let n = word.chars().count();
        let matches = self.chars.len() >= self.pos + n
            && self.chars[self.pos..self.pos + n].iter().map(|&(_, c)| c).eq(word.chars());
        let boundary = self
            .chars
            .get(self.pos + n)
            .is_none_or(|&(_, c)| !(c.is_alphanumeric() || c == '_'));
        if matches && boundary {
            self.pos += n;
            true
        } else {
            false
        }
    }

    fn pattern(&mut self) -> Result<Pattern> {
        let mut items = Vec::new();
        loop {
            items.push(self.concat()?);
            if !self.eat('|') {
                break;
            }
        }
        Ok(Pattern::alternation_all(items).expect("at least one operand"))
    }

    fn concat(&mut self) -> Result<Pattern> {
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some('[') | Some('(') | Some('H') => items.push(self.quantified()?),
                _ => break,
            }
        }
        if items.is_empty() {
            return Err(self.error("expected `[`, `(` or HOLE"));
        }
        Ok(Pattern::concat_all(items).expect("at least one operand"))
    }

    fn quantified(&mut self) -> Result<Pattern> {
        let atom = self.atom()?;
        let Some(q) = self.quantifier() else {
            return Ok(atom);
        };
        if matches!(atom, Pattern::Quantified(..)) {
            return Err(self.error("stacked quantifier"));
        }
        let out = Pattern::Quantified(Box::new(atom), q);
        if self.quantifier().is_some() {
            self.pos -= 1;
            return Err(self.error("stacked quantifier"));
        }
        Ok(out)
    }

    fn quantifier(&mut self) -> Option<Quantifier> {
        // Quantifiers bind to the preceding atom without whitespace.
        let q = match self.peek()? {
            '?' => Quantifier::ZeroOrOne,
            '*' => Quantifier::ZeroOrMore,
            '+' => Quantifier::OneOrMore,
            _ => return None,
        };
        self.pos += 1;
        Some(q)
    }

    fn atom(&mut self) -> Result<Pattern> {
        self.skip_ws();
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                if self.eat(']') {
                    return Ok(Pattern::Token(Constraint::Wildcard));
                }
                let c = self.constraint()?;
                self.expect(']')?;
                Ok(Pattern::Token(c))
            }
            Some('(') => {
                self.pos += 1;
                let p = self.pattern()?;
                self.expect(')')?;
                Ok(p)
            }
            _ if self.keyword("HOLE") => Ok(Pattern::Hole),
            _ => Err(self.error("expected `[`, `(` or HOLE")),
        }
    }

    fn constraint(&mut self) -> Result<Constraint> {
        let mut items = Vec::new();
        loop {
            items.push(self.conjunction()?);
            if !self.eat('|') {
                break;
            }
        }
        Ok(items.into_iter().rev().reduce(|acc, c| Constraint::or(c, acc)).expect("non-empty"))
    }

    fn conjunction(&mut self) -> Result<Constraint> {
        let mut items = Vec::new();
        loop {
            items.push(self.unary()?);
            if !self.eat('&') {
                break;
            }
        }
        Ok(items.into_iter().rev().reduce(|acc, c| Constraint::and(c, acc)).expect("non-empty"))
    }

    fn unary(&mut self) -> Result<Constraint> {
        self.skip_ws();
        if self.eat('!') {
            return Ok(Constraint::not(self.unary()?));
        }
        if self.eat('(') {
            let c = self.constraint()?;
            self.expect(')')?;
            return Ok(c);
        }
        if self.keyword("HOLE") {
            return Ok(Constraint::Hole);
        }
        if self.keyword("ANY") {
            return Ok(Constraint::Wildcard);
        }
        self.field_is()
    }

    fn field_is(&mut self) -> Result<Constraint> {
        self.skip_ws();
        let start = self.offset();
        let mut name = String::new();
        while let Some(c) = self.peek().filter(|c| c.is_alphanumeric() || *c == '_') {
            name.push(c);
            self.pos += 1;
        }
        if name.is_empty() {
            return Err(self.error("expected a field name"));
        }
        let field = Field::from_name(&name).ok_or(Error::UnknownField { name, offset: start })?;
        self.expect('=')?;
        self.skip_ws();
        let value = if self.peek() == Some('"') {
            self.quoted()?
        } else {
            let mut v = String::new();
            while let Some(c) = self.peek().filter(|c| !c.is_whitespace() && !SPECIAL.contains(c)) {
                v.push(c);
                self.pos += 1;
            }
            v
        };
        if value.is_empty() {
            return Err(self.error("empty value"));
        }
        Ok(Constraint::field(field, &value))
    }

    fn quoted(&mut self) -> Result<String> {
        self.pos += 1;
        let mut v = String::new();
        loop {
            match self.peek() {
                None => return Err(self.error("unterminated string")),
                Some('"') => {
                    self.pos += 1;
                    return Ok(v);
                }
                Some('\\') => {
                    self.pos += 1;
                    let c = self.peek().ok_or_else(|| self.error("unterminated escape"))?;
                    v.push(c);
                    self.pos += 1;
                }
                Some(c) => {
                    v.push(c);
                    self.pos += 1;
                }
            }
        }
    }
}

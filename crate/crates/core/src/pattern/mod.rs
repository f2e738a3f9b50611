//! The rule language.
//!
//! A rule is a [`Pattern`] over token sequences whose leaves are bracketed
//! token [`Constraint`]s. During search both levels may contain holes
//! (placeholders); a pattern without holes is *complete* and can be run.
//!
//! Binary `Concat`/`Alternation` (and `And`/`Or`) nodes are canonically
//! right-nested; the printer flattens right-nested chains into n-ary
//! surface form and parenthesizes anything else, so `parse(print(p)) == p`
//! for every pattern.

mod grammar;
mod syntax;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

pub use crate::corpus::Field;
pub use grammar::{expansions, leftmost_hole, HoleSite, Parent, State, Vocabulary};
pub use syntax::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    ZeroOrOne,
    ZeroOrMore,
    OneOrMore,
}

impl Quantifier {
    pub const ALL: [Quantifier; 3] = [Quantifier::ZeroOrOne, Quantifier::ZeroOrMore, Quantifier::OneOrMore];

    pub fn symbol(self) -> char {
        match self {
            Quantifier::ZeroOrOne => '?',
            Quantifier::ZeroOrMore => '*',
            Quantifier::OneOrMore => '+',
        }
    }
}

/// Predicate over a single token.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    Hole,
    /// Any token (`[]`).
    Wildcard,
    /// Field equals value; the value is non-empty and lowercase.
    FieldIs(Field, String),
    Not(Box<Constraint>),
    And(Box<Constraint>, Box<Constraint>),
    Or(Box<Constraint>, Box<Constraint>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Pattern {
    Hole,
    Token(Constraint),
    Concat(Box<Pattern>, Box<Pattern>),
    Alternation(Box<Pattern>, Box<Pattern>),
    Quantified(Box<Pattern>, Quantifier),
}

impl Constraint {
    pub fn field(field: Field, value: &str) -> Constraint {
        Constraint::FieldIs(field, value.to_lowercase())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Constraint) -> Constraint {
        Constraint::Not(Box::new(c))
    }

    pub fn and(l: Constraint, r: Constraint) -> Constraint {
        Constraint::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Constraint, r: Constraint) -> Constraint {
        Constraint::Or(Box::new(l), Box::new(r))
    }

    pub fn hole_count(&self) -> usize {
        match self {
            Constraint::Hole => 1,
            Constraint::Wildcard | Constraint::FieldIs(..) => 0,
            Constraint::Not(c) => c.hole_count(),
            Constraint::And(l, r) | Constraint::Or(l, r) => l.hole_count() + r.hole_count(),
        }
    }

    pub fn is_complete(&self) -> bool {
        match self {
            Constraint::Hole => false,
            Constraint::Wildcard | Constraint::FieldIs(..) => true,
            Constraint::Not(c) => c.is_complete(),
            Constraint::And(l, r) | Constraint::Or(l, r) => l.is_complete() && r.is_complete(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Constraint::Hole | Constraint::Wildcard | Constraint::FieldIs(..) => 1,
            Constraint::Not(c) => 1 + c.node_count(),
            Constraint::And(l, r) | Constraint::Or(l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    fn linearize_into(&self, out: &mut Vec<String>) {
        match self {
            Constraint::Hole => out.push("HOLE".to_string()),
            Constraint::Wildcard => out.push("WILDCARD".to_string()),
            Constraint::FieldIs(f, v) => {
                out.push(format!("FIELD={}", f.name()));
                out.push(format!("VAL={v}"));
            }
            Constraint::Not(c) => {
                out.push("NOT".to_string());
                c.linearize_into(out);
            }
            Constraint::And(l, r) | Constraint::Or(l, r) => {
                out.push(if matches!(self, Constraint::And(..)) { "AND" } else { "OR" }.to_string());
                l.linearize_into(out);
                r.linearize_into(out);
            }
        }
    }
}

impl Pattern {
    pub fn token(c: Constraint) -> Pattern {
        Pattern::Token(c)
    }

    pub fn concat(l: Pattern, r: Pattern) -> Pattern {
        Pattern::Concat(Box::new(l), Box::new(r))
    }

    pub fn alternation(l: Pattern, r: Pattern) -> Pattern {
        Pattern::Alternation(Box::new(l), Box::new(r))
    }

    pub fn quantified(p: Pattern, q: Quantifier) -> Pattern {
        Pattern::Quantified(Box::new(p), q)
    }

    /// Right-nested concatenation of `items`; `None` when empty.
    pub fn concat_all(items: Vec<Pattern>) -> Option<Pattern> {
        items.into_iter().rev().reduce(|acc, p| Pattern::concat(p, acc))
    }

    /// Right-nested alternation of `items`; `None` when empty.
    pub fn alternation_all(items: Vec<Pattern>) -> Option<Pattern> {
        items.into_iter().rev().reduce(|acc, p| Pattern::alternation(p, acc))
    }

    /// Holes at both levels.
    pub fn hole_count(&self) -> usize {
        match self {
            Pattern::Hole => 1,
            Pattern::Token(c) => c.hole_count(),
            Pattern::Concat(l, r) | Pattern::Alternation(l, r) => l.hole_count() + r.hole_count(),
            Pattern::Quantified(p, _) => p.hole_count(),
        }
    }

    pub fn is_complete(&self) -> bool {
        match self {
            Pattern::Hole => false,
            Pattern::Token(c) => c.is_complete(),
            Pattern::Concat(l, r) | Pattern::Alternation(l, r) => l.is_complete() && r.is_complete(),
            Pattern::Quantified(p, _) => p.is_complete(),
        }
    }

    /// AST nodes at both levels, holes included.
    pub fn node_count(&self) -> usize {
        match self {
            Pattern::Hole => 1,
            Pattern::Token(c) => 1 + c.node_count(),
            Pattern::Concat(l, r) | Pattern::Alternation(l, r) => 1 + l.node_count() + r.node_count(),
            Pattern::Quantified(p, _) => 1 + p.node_count(),
        }
    }

    pub fn token_pattern_count(&self) -> usize {
        match self {
            Pattern::Hole => 0,
            Pattern::Token(_) => 1,
            Pattern::Concat(l, r) | Pattern::Alternation(l, r) => {
                l.token_pattern_count() + r.token_pattern_count()
            }
            Pattern::Quantified(p, _) => p.token_pattern_count(),
        }
    }

    /// Operands of the top-level concatenation chain, whatever its nesting.
    pub fn concat_items(&self) -> Vec<&Pattern> {
        fn go<'a>(p: &'a Pattern, out: &mut Vec<&'a Pattern>) {
            match p {
                Pattern::Concat(l, r) => {
                    go(l, out);
                    go(r, out);
                }
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        go(self, &mut out);
        out
    }

    /// Re-associates every `Concat`/`Alternation` chain to the right.
    pub fn canonicalize(&self) -> Pattern {
        match self {
            Pattern::Hole => Pattern::Hole,
            Pattern::Token(c) => Pattern::Token(canonical_constraint(c)),
            Pattern::Concat(..) => {
                let items = self.concat_items().into_iter().map(Pattern::canonicalize).collect();
                Pattern::concat_all(items).expect("non-empty chain")
            }
            Pattern::Alternation(..) => {
                fn go(p: &Pattern, out: &mut Vec<Pattern>) {
                    match p {
                        Pattern::Alternation(l, r) => {
                            go(l, out);
                            go(r, out);
                        }
                        other => out.push(other.canonicalize()),
                    }
                }
                let mut items = Vec::new();
                go(self, &mut items);
                Pattern::alternation_all(items).expect("non-empty chain")
            }
            Pattern::Quantified(p, q) => Pattern::quantified(p.canonicalize(), *q),
        }
    }

    /// Pre-order symbol stream used as scorer input.
    pub fn linearize(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.linearize_into(&mut out);
        out
    }

    fn linearize_into(&self, out: &mut Vec<String>) {
        match self {
            Pattern::Hole => out.push("HOLE".to_string()),
            Pattern::Token(c) => {
                out.push("TOKEN".to_string());
                c.linearize_into(out);
            }
            Pattern::Concat(l, r) => {
                out.push("CONCAT".to_string());
                l.linearize_into(out);
                r.linearize_into(out);
            }
            Pattern::Alternation(l, r) => {
                out.push("ALT".to_string());
                l.linearize_into(out);
                r.linearize_into(out);
            }
            Pattern::Quantified(p, q) => {
                out.push(format!("QUANT={}", q.symbol()));
                p.linearize_into(out);
            }
        }
    }

    /// Whether `target` can be reached from `self` by filling holes:
    /// every pattern hole stands for any pattern subtree and every
    /// constraint hole for any constraint subtree.
    pub fn generalizes(&self, target: &Pattern) -> bool {
        match (self, target) {
            (Pattern::Hole, _) => true,
            (Pattern::Token(a), Pattern::Token(b)) => a.generalizes(b),
            (Pattern::Concat(a1, a2), Pattern::Concat(b1, b2))
            | (Pattern::Alternation(a1, a2), Pattern::Alternation(b1, b2)) => {
                a1.generalizes(b1) && a2.generalizes(b2)
            }
            (Pattern::Quantified(a, qa), Pattern::Quantified(b, qb)) => qa == qb && a.generalizes(b),
            _ => false,
        }
    }
}

impl Constraint {
    /// Constraint-level counterpart of [`Pattern::generalizes`].
    pub fn generalizes(&self, target: &Constraint) -> bool {
        match (self, target) {
            (Constraint::Hole, _) => true,
            (Constraint::Wildcard, Constraint::Wildcard) => true,
            (Constraint::FieldIs(f, v), Constraint::FieldIs(g, w)) => f == g && v == w,
            (Constraint::Not(a), Constraint::Not(b)) => a.generalizes(b),
            (Constraint::And(a1, a2), Constraint::And(b1, b2))
            | (Constraint::Or(a1, a2), Constraint::Or(b1, b2)) => a1.generalizes(b1) && a2.generalizes(b2),
            _ => false,
        }
    }
}

fn canonical_constraint(c: &Constraint) -> Constraint {
    fn chain(c: &Constraint, and: bool, out: &mut Vec<Constraint>) {
        match (c, and) {
            (Constraint::And(l, r), true) | (Constraint::Or(l, r), false) => {
                chain(l, and, out);
                chain(r, and, out);
            }
            (other, _) => out.push(canonical_constraint(other)),
        }
    }
    let rebuild = |and: bool| {
        let mut items = Vec::new();
        chain(c, and, &mut items);
        items
            .into_iter()
            .rev()
            .reduce(|acc, x| if and { Constraint::and(x, acc) } else { Constraint::or(x, acc) })
            .expect("non-empty chain")
    };
    match c {
        Constraint::And(..) => rebuild(true),
        Constraint::Or(..) => rebuild(false),
        Constraint::Not(x) => Constraint::not(canonical_constraint(x)),
        other => other.clone(),
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print(self))
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&syntax::print_constraint(self))
    }
}

/// Printed form of a pattern (`HOLE` for placeholders).
pub fn print(pattern: &Pattern) -> String {
    syntax::print(pattern)
}

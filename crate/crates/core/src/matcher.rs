//! Running rules against token sequences.
//!
//! Matching is anchored at both ends: a pattern matches `[a, b)` when it can
//! consume exactly those tokens. Internally every node maps a start position
//! to the set of positions it can end at; quantifier repetitions must each
//! consume at least one token, except that `+` may spend its one mandatory
//! repetition on an empty match.

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::{AnnotatedSentence, Span, SpecEntry, Specification, Token};
use crate::pattern::{Constraint, Pattern, Quantifier};
use crate::{Error, Result};

/// Non-overlapping spans found by [`find_matches`], in sentence order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchSet {
    spans: Vec<Span>,
}

impl MatchSet {
    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    /// Tokens covered by some span.
    pub fn covered(&self) -> usize {
        self.spans.iter().map(Span::len).sum()
    }
}

impl IntoIterator for MatchSet {
    type Item = Span;
    type IntoIter = vec::IntoIter<Span>;

    fn into_iter(self) -> Self::IntoIter {
        self.spans.into_iter()
    }
}

fn require_complete(p: &Pattern) -> Result<()> {
    if p.is_complete() {
        Ok(())
    } else {
        Err(Error::IncompletePattern)
    }
}

pub(crate) fn satisfies(c: &Constraint, tok: &Token) -> bool {
    match c {
        Constraint::Wildcard => true,
        Constraint::FieldIs(f, v) => tok.field(*f) == v,
        Constraint::Not(x) => !satisfies(x, tok),
        Constraint::And(l, r) => satisfies(l, tok) && satisfies(r, tok),
        Constraint::Or(l, r) => satisfies(l, tok) || satisfies(r, tok),
        Constraint::Hole => unreachable!("constraint holes never reach the matcher"),
    }
}

/// Reachable end positions as a membership mask over `0..=toks.len()`.
fn ends(p: &Pattern, toks: &[Token], start: usize, out: &mut [bool]) {
    match p {
        Pattern::Token(c) => {
            if start < toks.len() && satisfies(c, &toks[start]) {
                out[start + 1] = true;
            }
        }
        Pattern::Concat(l, r) => {
            let mut mid = vec![false; out.len()];
            ends(l, toks, start, &mut mid);
            for (m, _) in mid.iter().enumerate().filter(|(_, &hit)| hit) {
                ends(r, toks, m, out);
            }
        }
        Pattern::Alternation(l, r) => {
            ends(l, toks, start, out);
            ends(r, toks, start, out);
        }
        Pattern::Quantified(child, q) => {
            let mut seeds = vec![false; out.len()];
            match q {
                Quantifier::ZeroOrOne => {
                    out[start] = true;
                    ends(child, toks, start, out);
                    return;
                }
                Quantifier::ZeroOrMore => seeds[start] = true,
                Quantifier::OneOrMore => ends(child, toks, start, &mut seeds),
            }
            repeat(child, toks, &mut seeds);
            for (o, s) in out.iter_mut().zip(&seeds) {
                *o |= *s;
            }
        }
        Pattern::Hole => unreachable!("pattern holes never reach the matcher"),
    }
}

/// Closes `reached` under non-empty repetitions of `child`.
fn repeat(child: &Pattern, toks: &[Token], reached: &mut [bool]) {
    let mut step = vec![false; reached.len()];
    // Positions only ever grow, so a single left-to-right sweep suffices.
    for pos in 0..reached.len() {
        if !reached[pos] {
            continue;
        }
        step.iter_mut().for_each(|s| *s = false);
        ends(child, toks, pos, &mut step);
        for e in pos + 1..reached.len() {
            reached[e] |= step[e];
        }
    }
}

fn longest_from(p: &Pattern, toks: &[Token], start: usize, mask: &mut [bool]) -> Option<usize> {
    mask.iter_mut().for_each(|m| *m = false);
    ends(p, toks, start, mask);
    (start + 1..mask.len()).rev().find(|&e| mask[e])
}

pub(crate) fn accepts(p: &Pattern, toks: &[Token], span: Span) -> bool {
    let window = &toks[..span.end];
    let mut mask = vec![false; window.len() + 1];
    ends(p, window, span.start, &mut mask);
    mask[span.end]
}

/// Greedy leftmost-longest scan over a complete pattern.
pub(crate) fn scan(p: &Pattern, toks: &[Token]) -> Vec<Span> {
    let mut out = Vec::new();
    let mut mask = vec![false; toks.len() + 1];
    let mut i = 0;
    while i < toks.len() {
        match longest_from(p, toks, i, &mut mask) {
            Some(j) => {
                out.push(Span::new(i, j));
                i = j;
            }
            None => i += 1,
        }
    }
    out
}

/// Whether `pattern` consumes exactly the tokens of `span`.
pub fn matches_exact(pattern: &Pattern, sentence: &AnnotatedSentence, span: Span) -> Result<bool> {
    require_complete(pattern)?;
    span.check(sentence.len())?;
    Ok(accepts(pattern, sentence.tokens(), span))
}

pub fn find_matches(pattern: &Pattern, sentence: &AnnotatedSentence) -> Result<MatchSet> {
    require_complete(pattern)?;
    Ok(MatchSet { spans: scan(pattern, sentence.tokens()) })
}

pub(crate) fn entry_satisfied(pattern: &Pattern, entry: &SpecEntry) -> bool {
    scan(pattern, entry.sentence().tokens()) == entry.selections()
}

/// True when every entry's match set is exactly its selection set.
pub fn check_spec(pattern: &Pattern, spec: &Specification) -> Result<bool> {
    require_complete(pattern)?;
    Ok(spec.entries().iter().all(|e| entry_satisfied(pattern, e)))
}

/// The most permissive complete rule reachable from `pattern`.
///
/// Pattern holes become `[]*`. Constraint holes become whatever makes the
/// enclosing token test weakest: `ANY` under an even number of negations,
/// `!ANY` under an odd number, with double negations folded away. A
/// quantified hole becomes `[]*` outright so quantifiers never stack.
pub fn least_restrictive_completion(pattern: &Pattern) -> Pattern {
    let anything = || Pattern::quantified(Pattern::Token(Constraint::Wildcard), Quantifier::ZeroOrMore);
    match pattern {
        Pattern::Hole => anything(),
        Pattern::Token(c) => Pattern::Token(complete_constraint(c, true)),
        Pattern::Concat(l, r) => {
            Pattern::concat(least_restrictive_completion(l), least_restrictive_completion(r))
        }
        Pattern::Alternation(l, r) => {
            Pattern::alternation(least_restrictive_completion(l), least_restrictive_completion(r))
        }
        Pattern::Quantified(child, _) if matches!(**child, Pattern::Hole) => anything(),
        Pattern::Quantified(child, q) => Pattern::quantified(least_restrictive_completion(child), *q),
    }
}

fn complete_constraint(c: &Constraint, positive: bool) -> Constraint {
    match c {
        Constraint::Hole if positive => Constraint::Wildcard,
        Constraint::Hole => Constraint::not(Constraint::Wildcard),
        Constraint::Wildcard | Constraint::FieldIs(..) => c.clone(),
        Constraint::Not(x) => match complete_constraint(x, !positive) {
            Constraint::Not(inner) => *inner,
            other => Constraint::not(other),
        },
        Constraint::And(l, r) => {
            Constraint::and(complete_constraint(l, positive), complete_constraint(r, positive))
        }
        Constraint::Or(l, r) => Constraint::or(complete_constraint(l, positive), complete_constraint(r, positive)),
    }
}

/// True when no completion of `pattern` can cover every highlighted span.
/// Entries without selections never prune.
pub fn prune_check(pattern: &Pattern, spec: &Specification) -> bool {
    prune_entries(&least_restrictive_completion(pattern), spec.entries())
}

pub(crate) fn prune_entries(completion: &Pattern, entries: &[SpecEntry]) -> bool {
    entries.iter().any(|e| {
        let toks = e.sentence().tokens();
        e.selections().iter().any(|&sp| !accepts(completion, toks, sp))
    })
}

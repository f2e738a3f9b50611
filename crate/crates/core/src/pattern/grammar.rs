//! Search states and the single-step expansion grammar.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Constraint, Field, Pattern, Quantifier};
use crate::corpus::{SpecEntry, Specification};
use crate::scoring::{static_cost, CostTable};
use crate::{Error, Result};

/// A partial rule plus search bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub pattern: Pattern,
    /// `static_cost(pattern)` under the cost table that built the state.
    pub cost: f64,
    /// Expansions applied since the bare hole.
    pub depth: usize,
}

impl State {
    pub fn new(pattern: Pattern, costs: &CostTable, depth: usize) -> State {
        let cost = static_cost(&pattern, costs);
        State { pattern, cost, depth }
    }

    /// The bare placeholder every search starts from.
    pub fn root(costs: &CostTable) -> State {
        State::new(Pattern::Hole, costs, 0)
    }

    pub fn is_complete(&self) -> bool {
        self.pattern.is_complete()
    }
}

/// The `(field, value)` pairs a constraint hole may expand to: every layer
/// value seen on a highlighted token, fields in `Field` order and values in
/// order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    pairs: Vec<(Field, String)>,
}

impl Vocabulary {
    pub fn from_entries(entries: &[SpecEntry]) -> Vocabulary {
        let mut pairs: Vec<(Field, String)> = Vec::new();
        for field in Field::ALL {
            let mut seen: Vec<&str> = Vec::new();
            for entry in entries {
                let tokens = entry.sentence().tokens();
                for span in entry.selections() {
                    for tok in &tokens[span.start..span.end] {
                        let value = tok.field(field);
                        if !seen.contains(&value) {
                            seen.push(value);
                        }
                    }
                }
            }
            pairs.extend(seen.into_iter().map(|v| (field, String::from(v))));
        }
        Vocabulary { pairs }
    }

    pub fn from_spec(spec: &Specification) -> Vocabulary {
        Vocabulary::from_entries(spec.entries())
    }

    pub fn pairs(&self) -> &[(Field, String)] {
        &self.pairs
    }

    pub fn contains(&self, field: Field, value: &str) -> bool {
        self.pairs.iter().any(|(f, v)| *f == field && v == value)
    }
}

/// What the leftmost hole hangs off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parent {
    Root,
    ConcatLeft,
    ConcatRight,
    AltLeft,
    AltRight,
    Quantified,
    Token,
    NotChild,
    AndLeft,
    AndRight,
    OrLeft,
    OrRight,
}

impl Parent {
    pub fn name(self) -> &'static str {
        match self {
            Parent::Root => "root",
            Parent::ConcatLeft => "concat-l",
            Parent::ConcatRight => "concat-r",
            Parent::AltLeft => "alt-l",
            Parent::AltRight => "alt-r",
            Parent::Quantified => "quant",
            Parent::Token => "token",
            Parent::NotChild => "not",
            Parent::AndLeft => "and-l",
            Parent::AndRight => "and-r",
            Parent::OrLeft => "or-l",
            Parent::OrRight => "or-r",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoleSite {
    /// Child indices from the root; a token's constraint is child 0.
    pub path: Vec<usize>,
    pub constraint_level: bool,
    pub parent: Parent,
}

/// Path to the first hole in pre-order, or `None` for complete patterns.
pub fn leftmost_hole(pattern: &Pattern) -> Option<Vec<usize>> {
    HoleSite::find(pattern).map(|site| site.path)
}

impl HoleSite {
    pub fn find(pattern: &Pattern) -> Option<HoleSite> {
        let mut path = Vec::new();
        find_in_pattern(pattern, Parent::Root, &mut path)
    }
}

fn find_in_pattern(p: &Pattern, parent: Parent, path: &mut Vec<usize>) -> Option<HoleSite> {
    let child = |c: &Pattern, idx: usize, parent: Parent, path: &mut Vec<usize>| {
        path.push(idx);
        let found = find_in_pattern(c, parent, path);
        if found.is_none() {
            path.pop();
        }
        found
    };
    match p {
        Pattern::Hole => Some(HoleSite { path: path.clone(), constraint_level: false, parent }),
        Pattern::Token(c) => {
            path.push(0);
            let found = find_in_constraint(c, Parent::Token, path);
            if found.is_none() {
                path.pop();
            }
            found
        }
        Pattern::Concat(l, r) => child(l, 0, Parent::ConcatLeft, path)
            .or_else(|| child(r, 1, Parent::ConcatRight, path)),
        Pattern::Alternation(l, r) => child(l, 0, Parent::AltLeft, path)
            .or_else(|| child(r, 1, Parent::AltRight, path)),
        Pattern::Quantified(c, _) => child(c, 0, Parent::Quantified, path),
    }
}

fn find_in_constraint(c: &Constraint, parent: Parent, path: &mut Vec<usize>) -> Option<HoleSite> {
    let child = |c: &Constraint, idx: usize, parent: Parent, path: &mut Vec<usize>| {
        path.push(idx);
        let found = find_in_constraint(c, parent, path);
        if found.is_none() {
            path.pop();
        }
        found
    };
    match c {
        Constraint::Hole => Some(HoleSite { path: path.clone(), constraint_level: true, parent }),
        Constraint::Wildcard | Constraint::FieldIs(..) => None,
        Constraint::Not(x) => child(x, 0, Parent::NotChild, path),
        Constraint::And(l, r) => child(l, 0, Parent::AndLeft, path).or_else(|| child(r, 1, Parent::AndRight, path)),
        Constraint::Or(l, r) => child(l, 0, Parent::OrLeft, path).or_else(|| child(r, 1, Parent::OrRight, path)),
    }
}

/// Replacement for the leftmost hole.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Fill {
    Pattern(Pattern),
    Constraint(Constraint),
}

pub(crate) fn fill_leftmost(p: &Pattern, fill: &Fill) -> Pattern {
    match p {
        Pattern::Hole => match fill {
            Fill::Pattern(x) => x.clone(),
            Fill::Constraint(_) => unreachable!("leftmost hole is pattern-level"),
        },
        Pattern::Token(c) => Pattern::Token(fill_constraint(c, fill)),
        Pattern::Concat(l, r) if !l.is_complete() => Pattern::concat(fill_leftmost(l, fill), (**r).clone()),
        Pattern::Concat(l, r) => Pattern::concat((**l).clone(), fill_leftmost(r, fill)),
        Pattern::Alternation(l, r) if !l.is_complete() => {
            Pattern::alternation(fill_leftmost(l, fill), (**r).clone())
        }
        Pattern::Alternation(l, r) => Pattern::alternation((**l).clone(), fill_leftmost(r, fill)),
        Pattern::Quantified(c, q) => Pattern::quantified(fill_leftmost(c, fill), *q),
    }
}

fn fill_constraint(c: &Constraint, fill: &Fill) -> Constraint {
    match c {
        Constraint::Hole => match fill {
            Fill::Constraint(x) => x.clone(),
            Fill::Pattern(_) => unreachable!("leftmost hole is constraint-level"),
        },
        Constraint::Wildcard | Constraint::FieldIs(..) => c.clone(),
        Constraint::Not(x) => Constraint::not(fill_constraint(x, fill)),
        Constraint::And(l, r) if !l.is_complete() => Constraint::and(fill_constraint(l, fill), (**r).clone()),
        Constraint::And(l, r) => Constraint::and((**l).clone(), fill_constraint(r, fill)),
        Constraint::Or(l, r) if !l.is_complete() => Constraint::or(fill_constraint(l, fill), (**r).clone()),
        Constraint::Or(l, r) => Constraint::or((**l).clone(), fill_constraint(r, fill)),
    }
}

/// Candidate fills of the leftmost hole, in the fixed expansion order.
pub(crate) fn fills(site: &HoleSite, vocab: &Vocabulary) -> Vec<Fill> {
    if site.constraint_level {
        let mut out = vec![Fill::Constraint(Constraint::Wildcard)];
        out.extend(
            vocab
                .pairs()
                .iter()
                .map(|(f, v)| Fill::Constraint(Constraint::FieldIs(*f, v.clone()))),
        );
        if site.parent != Parent::NotChild {
            out.push(Fill::Constraint(Constraint::not(Constraint::Hole)));
        }
        if site.parent != Parent::AndLeft {
            out.push(Fill::Constraint(Constraint::and(Constraint::Hole, Constraint::Hole)));
        }
        if site.parent != Parent::OrLeft {
            out.push(Fill::Constraint(Constraint::or(Constraint::Hole, Constraint::Hole)));
        }
        out
    } else {
        let mut out = Vec::with_capacity(6);
        if site.parent != Parent::ConcatLeft {
            out.push(Fill::Pattern(Pattern::concat(Pattern::Hole, Pattern::Hole)));
        }
        out.push(Fill::Pattern(Pattern::Token(Constraint::Hole)));
        if site.parent != Parent::AltLeft {
            out.push(Fill::Pattern(Pattern::alternation(Pattern::Hole, Pattern::Hole)));
        }
        if site.parent != Parent::Quantified {
            out.extend(
                Quantifier::ALL
                    .into_iter()
                    .map(|q| Fill::Pattern(Pattern::quantified(Pattern::Hole, q))),
            );
        }
        out
    }
}

/// Every legal single-step expansion of the leftmost hole, in this order:
///
/// - pattern hole: `□ □`, `[□]`, `□|□`, `□?`, `□*`, `□+`
/// - constraint hole: wildcard, each vocabulary `field=value`, `!□`,
///   `□ & □`, `□ | □`
///
/// Quantifiers never stack and negations never double. A hole that is the
/// left operand of a concatenation (alternation, conjunction, disjunction)
/// cannot expand into the same operator, so chains are only ever built
/// right-nested and each rule has exactly one derivation.
pub fn expansions(state: &State, vocab: &Vocabulary, costs: &CostTable) -> Result<Vec<State>> {
    let site = HoleSite::find(&state.pattern).ok_or(Error::NoHole)?;
    Ok(fills(&site, vocab)
        .iter()
        .map(|fill| State::new(fill_leftmost(&state.pattern, fill), costs, state.depth + 1))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{Span, SpecMode};
    use crate::pattern::{parse, print};
    use alloc::string::ToString;

    fn printed(states: &[State]) -> Vec<String> {
        states.iter().map(|s| print(&s.pattern)).collect()
    }

    fn dog_vocab() -> Vocabulary {
        let entry = SpecEntry::new(the_dog_barked(), vec![Span::new(1, 2)]).unwrap();
        Vocabulary::from_entries(&[entry])
    }

    #[test]
    fn root_expansions_in_order() {
        let costs = CostTable::default();
        let out = expansions(&State::root(&costs), &Vocabulary::default(), &costs).unwrap();
        assert_eq!(printed(&out), ["HOLE HOLE", "[HOLE]", "HOLE|HOLE", "HOLE?", "HOLE*", "HOLE+"]);
        assert!(out.iter().all(|s| s.depth == 1));
    }

    #[test]
    fn constraint_hole_uses_highlight_vocabulary() {
        let son = crate::corpus::sentence("s", &["son/son/NN/O"], &[]);
        let entry = SpecEntry::new(son, vec![Span::new(0, 1)]).unwrap();
        let spec = Specification::new(vec![entry], SpecMode::Surface).unwrap();
        let vocab = Vocabulary::from_spec(&spec);
        let costs = CostTable::default();
        let state = State::new(parse("[HOLE]").unwrap(), &costs, 1);
        let out = printed(&expansions(&state, &vocab, &costs).unwrap());
        assert_eq!(
            out,
            ["[]", "[word=son]", "[lemma=son]", "[tag=nn]", "[entity=o]", "[!HOLE]", "[HOLE & HOLE]", "[HOLE | HOLE]"]
        );
    }

    #[test]
    fn vocabulary_order_is_field_then_first_occurrence() {
        let v = dog_vocab();
        let f: Vec<(Field, &str)> = v.pairs().iter().map(|(f, s)| (*f, s.as_str())).collect();
        assert_eq!(f, [(Field::Word, "dog"), (Field::Lemma, "dog"), (Field::Tag, "nn"), (Field::Entity, "o")]);
    }

    #[test]
    fn legality_filters() {
        let costs = CostTable::default();
        let v = Vocabulary::default();
        let ex = |s: &str| printed(&expansions(&State::new(parse(s).unwrap(), &costs, 0), &v, &costs).unwrap());
        // Under a quantifier: no stacking.
        assert_eq!(ex("HOLE?"), ["(HOLE HOLE)?", "[HOLE]?", "(HOLE|HOLE)?"]);
        // Under a negation: no double negation.
        assert_eq!(ex("[!HOLE]"), ["[!ANY]", "[!(HOLE & HOLE)]", "[!(HOLE | HOLE)]"]);
        // Left operands stay operator-free.
        assert!(!ex("HOLE HOLE").contains(&"(HOLE HOLE) HOLE".to_string()));
        assert!(ex("[word=a] HOLE").contains(&"[word=a] HOLE HOLE".to_string()));
        assert!(!ex("HOLE|HOLE").iter().any(|s| s.starts_with("(HOLE|HOLE)|")));
        assert_eq!(ex("[HOLE & HOLE]"), ["[ANY & HOLE]", "[!HOLE & HOLE]", "[(HOLE | HOLE) & HOLE]"]);
    }

    #[test]
    fn complete_pattern_has_no_expansion() {
        let costs = CostTable::default();
        let state = State::new(parse("[word=son]").unwrap(), &costs, 2);
        assert_eq!(expansions(&state, &dog_vocab(), &costs), Err(Error::NoHole));
    }

    #[test]
    fn leftmost_hole_paths() {
        assert_eq!(leftmost_hole(&Pattern::Hole), Some(vec![]));
        assert_eq!(leftmost_hole(&parse("[word=a] HOLE").unwrap()), Some(vec![1]));
        assert_eq!(leftmost_hole(&parse("[HOLE & word=a]").unwrap()), Some(vec![0, 0]));
        assert_eq!(leftmost_hole(&parse("[word=a & !HOLE] HOLE").unwrap()), Some(vec![0, 0, 1, 0]));
        assert_eq!(leftmost_hole(&parse("[word=a]").unwrap()), None);
    }

    #[test]
    fn hole_arithmetic() {
        fn introduced(fill: &Fill) -> usize {
            match fill {
                Fill::Pattern(Pattern::Concat(..) | Pattern::Alternation(..)) => 2,
                Fill::Pattern(Pattern::Quantified(..) | Pattern::Token(_)) => 1,
                Fill::Constraint(Constraint::Wildcard | Constraint::FieldIs(..)) => 0,
                Fill::Constraint(Constraint::Not(_)) => 1,
                Fill::Constraint(Constraint::And(..) | Constraint::Or(..)) => 2,
                other => panic!("unexpected fill {other:?}"),
            }
        }
        let costs = CostTable::default();
        let vocab = dog_vocab();
        let mut frontier = vec![State::root(&costs)];
        let mut checked = 0;
        for _ in 0..3 {
            let mut next = Vec::new();
            for s in frontier.iter().filter(|s| !s.is_complete()) {
                let site = HoleSite::find(&s.pattern).unwrap();
                let children = expansions(s, &vocab, &costs).unwrap();
                for (fill, child) in fills(&site, &vocab).iter().zip(&children) {
                    assert_eq!(child.pattern.hole_count(), s.pattern.hole_count() - 1 + introduced(fill));
                    checked += 1;
                }
                next.extend(children);
            }
            frontier = next;
        }
        assert!(checked > 100);
    }
}

//! Hashed transition features.
//!
//! Four segments mirror the input of a sequence-pair classifier: the
//! current state (1), the candidate (2), highlighted tokens (3) and the
//! remaining tokens (4). On top of the raw n-grams sit transition features
//! that relate the node a candidate introduces to the tokens it would have
//! to match next.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::augment::augmentation_reward;
use crate::corpus::{Field, SpecEntry};
use crate::hash::Fnv;
use crate::matcher;
use crate::pattern::{Constraint, HoleSite, Pattern, State};

pub const DEFAULT_DIM: usize = 1 << 18;

/// Active feature indices, sorted; repeated indices count repeatedly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Features {
    indices: Vec<u32>,
}

impl Features {
    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        dot(&self.indices, weights)
    }

    pub(crate) fn from_parts(parts: &[&[u32]]) -> Features {
        let mut indices: Vec<u32> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        indices.sort_unstable();
        Features { indices }
    }
}

pub(crate) fn dot(indices: &[u32], weights: &[f64]) -> f64 {
    indices.iter().map(|&i| weights[i as usize]).sum()
}

struct Sink {
    mask: u64,
    out: Vec<u32>,
}

impl Sink {
    fn new(dim: usize) -> Sink {
        debug_assert!(dim.is_power_of_two());
        Sink { mask: dim as u64 - 1, out: Vec::new() }
    }

    fn add(&mut self, parts: &[&str]) {
        let mut h = Fnv::new();
        for p in parts {
            h.part(p);
        }
        self.out.push((h.finish() & self.mask) as u32);
    }
}

fn bucket(n: i64) -> &'static str {
    match n {
        i64::MIN..=-3 => "-3",
        -2 => "-2",
        -1 => "-1",
        0 => "0",
        1 => "1",
        2 => "2",
        3 => "3",
        _ => "4+",
    }
}

/// Unigrams and bigrams of the linearized AST, tagged with a segment.
pub(crate) fn state_part(segment: &str, pattern: &Pattern, dim: usize) -> Vec<u32> {
    let mut sink = Sink::new(dim);
    let syms = pattern.linearize();
    for s in &syms {
        sink.add(&[segment, "u", s]);
    }
    for pair in syms.windows(2) {
        sink.add(&[segment, "b", &pair[0], &pair[1]]);
    }
    sink.add(&[segment, "holes", bucket(pattern.hole_count() as i64)]);
    sink.out
}

/// Per-entry inputs shared by every transition scored against it.
pub(crate) struct EntryPart {
    pub(crate) indices: Vec<u32>,
}

pub(crate) fn entry_part(entry: &SpecEntry, dim: usize) -> EntryPart {
    let mut sink = Sink::new(dim);
    for (i, tok) in entry.sentence().tokens().iter().enumerate() {
        let seg = if entry.is_highlighted(i) { "3" } else { "4" };
        for f in Field::ALL {
            sink.add(&[seg, f.name(), tok.field(f)]);
        }
    }
    EntryPart { indices: sink.out }
}

/// What the current state looks like to the transition features.
pub(crate) struct CurrentPart {
    pub(crate) indices: Vec<u32>,
    site: Option<HoleSite>,
    /// Complete concatenation items ahead of the one holding the hole.
    prefix: Option<Pattern>,
    pattern: Pattern,
}

pub(crate) fn current_part(current: &State, dim: usize) -> CurrentPart {
    let site = HoleSite::find(&current.pattern);
    let items = current.pattern.concat_items();
    let prefix = Pattern::concat_all(items.iter().take_while(|p| p.is_complete()).map(|p| (*p).clone()).collect());
    CurrentPart { indices: state_part("1", &current.pattern, dim), site, prefix, pattern: current.pattern.clone() }
}

/// How the current state lines up with one entry.
pub(crate) struct Alignment {
    /// Token positions where the hole's concatenation item would start.
    aligned: Vec<usize>,
    /// Tokens left in the selection after the prefix, at the earliest alignment.
    remaining: Option<usize>,
    reward: i64,
    highlighted: Vec<usize>,
}

pub(crate) fn align(cur: &CurrentPart, entry: &SpecEntry) -> Alignment {
    let toks = entry.sentence().tokens();
    let mut aligned = Vec::new();
    let mut remaining = None;
    for sel in entry.selections() {
        let mut starts = vec![sel.start];
        if let Some(prefix) = &cur.prefix {
            starts = (sel.start..=sel.end)
                .filter(|&e| matcher::accepts(prefix, toks, crate::corpus::Span { start: sel.start, end: e }))
                .collect();
        }
        if let Some(&first) = starts.first() {
            let rem = sel.end - first;
            remaining = Some(remaining.map_or(rem, |r: usize| r.max(rem)));
        }
        aligned.extend(starts.into_iter().filter(|&p| p < sel.end));
    }
    let highlighted = entry.selections().iter().flat_map(|s| s.start..s.end).collect();
    Alignment { aligned, remaining, reward: augmentation_reward(&cur.pattern, entry), highlighted }
}

fn node_at<'a>(pattern: &'a Pattern, site: &HoleSite) -> Option<Intro<'a>> {
    let mut p = pattern;
    let mut path = site.path.iter();
    loop {
        if let Pattern::Token(c) = p {
            if site.constraint_level {
                path.next()?;
                return constraint_at(c, path.as_slice()).map(Intro::Constraint);
            }
        }
        let Some(&i) = path.next() else {
            return Some(Intro::Pattern(p));
        };
        p = match (p, i) {
            (Pattern::Concat(l, _) | Pattern::Alternation(l, _), 0) => l,
            (Pattern::Concat(_, r) | Pattern::Alternation(_, r), 1) => r,
            (Pattern::Quantified(c, _), 0) => c,
            _ => return None,
        };
    }
}

fn constraint_at<'a>(mut c: &'a Constraint, path: &[usize]) -> Option<&'a Constraint> {
    for &i in path {
        c = match (c, i) {
            (Constraint::Not(x), 0) => x,
            (Constraint::And(l, _) | Constraint::Or(l, _), 0) => l,
            (Constraint::And(_, r) | Constraint::Or(_, r), 1) => r,
            _ => return None,
        };
    }
    Some(c)
}

enum Intro<'a> {
    Pattern(&'a Pattern),
    Constraint(&'a Constraint),
}

impl Intro<'_> {
    fn symbol(&self) -> String {
        let s = match self {
            Intro::Pattern(Pattern::Hole) | Intro::Constraint(Constraint::Hole) => "HOLE",
            Intro::Pattern(Pattern::Token(_)) => "TOKEN",
            Intro::Pattern(Pattern::Concat(..)) => "CONCAT",
            Intro::Pattern(Pattern::Alternation(..)) => "ALT",
            Intro::Pattern(Pattern::Quantified(_, q)) => return alloc::format!("QUANT={}", q.symbol()),
            Intro::Constraint(Constraint::Wildcard) => "WILDCARD",
            Intro::Constraint(Constraint::FieldIs(f, _)) => return alloc::format!("FIELD={}", f.name()),
            Intro::Constraint(Constraint::Not(_)) => "NOT",
            Intro::Constraint(Constraint::And(..)) => "AND",
            Intro::Constraint(Constraint::Or(..)) => "OR",
        };
        String::from(s)
    }
}

/// Features tying the candidate's new node to the entry.
pub(crate) fn transition_part(
    cur: &CurrentPart,
    al: &Alignment,
    candidate: &State,
    entry: &SpecEntry,
    dim: usize,
) -> Vec<u32> {
    let mut sink = Sink::new(dim);
    let toks = entry.sentence().tokens();
    let intro = cur.site.as_ref().and_then(|site| node_at(&candidate.pattern, site));
    let sym = intro.as_ref().map_or(String::from("NONE"), Intro::symbol);
    let parent = cur.site.as_ref().map_or("none", |s| s.parent.name());

    sink.add(&["ip", parent, &sym]);
    let has_sel = !entry.selections().is_empty();
    match al.remaining {
        Some(rem) => {
            let rem = bucket(rem as i64);
            sink.add(&["rem", rem, &sym]);
            sink.add(&["remp", rem, parent, &sym]);
        }
        None => sink.add(&["rem", if has_sel { "overrun" } else { "nosel" }, &sym]),
    }

    for &i in &al.highlighted {
        for f in Field::ALL {
            sink.add(&["x", &sym, f.name(), toks[i].field(f)]);
        }
    }

    if let Some(Intro::Constraint(Constraint::FieldIs(f, v))) = &intro {
        let fname = f.name();
        let hit = |i: &usize| toks[*i].field(*f) == v;
        let aligned_hits = al.aligned.iter().filter(|i| hit(i)).count();
        let aligned_state = match (aligned_hits, al.aligned.len()) {
            (_, 0) => "none-aligned",
            (0, _) => "miss",
            (h, n) if h == n => "all",
            _ => "some",
        };
        sink.add(&["fa", aligned_state]);
        sink.add(&["fa", fname, aligned_state]);
        sink.add(&["fa", parent, aligned_state]);
        let in_highlight = al.highlighted.iter().any(hit);
        sink.add(&["fh", fname, if in_highlight { "y" } else { "n" }]);
        let outside = (0..toks.len()).filter(|i| !entry.is_highlighted(*i) && hit(i)).count();
        sink.add(&["fo", fname, bucket(outside as i64)]);
        sink.add(&["fv", fname, v]);
        if al.aligned.iter().any(|&i| toks[i].entity != "o") {
            sink.add(&["fent", fname, aligned_state]);
        }
    }

    let delta = augmentation_reward(&candidate.pattern, entry) - al.reward;
    sink.add(&["rd", bucket(delta), &sym]);
    if candidate.pattern.is_complete() {
        let ok = matcher::entry_satisfied(&candidate.pattern, entry);
        sink.add(&["done", if ok { "sat" } else { "unsat" }]);
    }
    sink.out
}

/// The full feature bag for one `(current, candidate, entry)` transition.
pub fn featurize(current: &State, candidate: &State, entry: &SpecEntry, dim: usize) -> Features {
    let cur = current_part(current, dim);
    let al = align(&cur, entry);
    let ent = entry_part(entry, dim);
    let cand = state_part("2", &candidate.pattern, dim);
    let trans = transition_part(&cur, &al, candidate, entry, dim);
    Features::from_parts(&[&cur.indices, &cand, &ent.indices, &trans])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{AnnotatedSentence, Span, Token};
    use crate::pattern::parse;
    use crate::scoring::CostTable;
    use alloc::vec;

    fn st(s: &str) -> State {
        State::new(parse(s).unwrap(), &CostTable::default(), 0)
    }

    fn dog_entry() -> SpecEntry {
        SpecEntry::new(the_dog_barked(), vec![Span::new(0, 3)]).unwrap()
    }

    #[test]
    fn deterministic() {
        let a = featurize(&st("[tag=dt] HOLE"), &st("[tag=dt] HOLE HOLE"), &dog_entry(), DEFAULT_DIM);
        let b = featurize(&st("[tag=dt] HOLE"), &st("[tag=dt] HOLE HOLE"), &dog_entry(), DEFAULT_DIM);
        assert_eq!(a, b);
        assert!(a.indices().windows(2).all(|w| w[0] <= w[1]));
        assert!(a.indices().iter().all(|&i| (i as usize) < DEFAULT_DIM));
    }

    #[test]
    fn sensitive_to_highlighted_words() {
        let e1 = dog_entry();
        let mut toks: Vec<Token> = e1.sentence().tokens().to_vec();
        toks[1] = Token::new("cat", "cat", "NN", "O", 1).unwrap();
        let s2 = AnnotatedSentence::new("d", toks, vec![]).unwrap();
        let e2 = SpecEntry::new(s2, vec![Span::new(0, 3)]).unwrap();
        let (cur, cand) = (st("HOLE"), st("[HOLE]"));
        assert_ne!(featurize(&cur, &cand, &e1, 1 << 12), featurize(&cur, &cand, &e2, 1 << 12));
    }

    #[test]
    fn segments_distinguish_direction() {
        let (a, b) = (st("[tag=dt] HOLE"), st("[tag=dt] [HOLE]"));
        let e = dog_entry();
        assert_ne!(featurize(&a, &b, &e, DEFAULT_DIM), featurize(&b, &a, &e, DEFAULT_DIM));
    }

    #[test]
    fn introduced_node_is_located() {
        let cur = current_part(&st("[tag=dt] [HOLE]"), 16);
        let cand = st("[tag=dt] [word=dog]");
        let site = cur.site.as_ref().unwrap();
        assert_eq!(node_at(&cand.pattern, site).unwrap().symbol(), "FIELD=word");
        let root = current_part(&st("HOLE"), 16);
        assert_eq!(node_at(&st("HOLE?").pattern, root.site.as_ref().unwrap()).unwrap().symbol(), "QUANT=?");
    }

    #[test]
    fn alignment_follows_prefix() {
        let e = dog_entry();
        let al = align(&current_part(&st("[tag=dt] [HOLE]"), 16), &e);
        assert_eq!(al.aligned, vec![1]);
        assert_eq!(al.remaining, Some(2));
        let al = align(&current_part(&st("[word=zzz] HOLE"), 16), &e);
        assert!(al.aligned.is_empty());
        assert_eq!(al.remaining, None);
    }
}

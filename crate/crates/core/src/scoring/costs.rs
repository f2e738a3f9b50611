use alloc::format;
use alloc::vec::Vec;

use super::{Scorer, ScorerError};
use crate::corpus::{Field, SpecEntry};
use crate::pattern::{Constraint, Pattern, Quantifier, State};
use crate::{Error, Result};

/// Per-node and per-field costs for the static scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    pub hole: f64,
    pub token: f64,
    pub concat: f64,
    pub alternation: f64,
    pub optional: f64,
    pub star: f64,
    pub plus: f64,
    pub and: f64,
    pub or: f64,
    pub not: f64,
    pub wildcard: f64,
    pub word: f64,
    pub lemma: f64,
    pub tag: f64,
    pub entity: f64,
}

impl Default for CostTable {
    fn default() -> Self {
        CostTable {
            hole: 1.0,
            token: 1.0,
            concat: 1.0,
            alternation: 2.0,
            optional: 2.0,
            star: 3.0,
            plus: 3.0,
            and: 2.0,
            or: 2.0,
            not: 5.0,
            wildcard: 4.0,
            word: 1.0,
            lemma: 1.2,
            tag: 1.5,
            entity: 1.5,
        }
    }
}

impl CostTable {
    /// Config keys, in the order [`CostTable::entries`] reports them.
    pub const KEYS: [&'static str; 15] = [
        "hole",
        "token",
        "concat",
        "alternation",
        "quant?",
        "quant*",
        "quant+",
        "and",
        "or",
        "not",
        "wildcard",
        "word",
        "lemma",
        "tag",
        "entity",
    ];

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key.to_ascii_lowercase().as_str() {
            "hole" => &mut self.hole,
            "token" | "tokenpattern" => &mut self.token,
            "concat" => &mut self.concat,
            "alternation" | "alt" => &mut self.alternation,
            "quant?" | "optional" => &mut self.optional,
            "quant*" | "star" => &mut self.star,
            "quant+" | "plus" => &mut self.plus,
            "and" => &mut self.and,
            "or" => &mut self.or,
            "not" => &mut self.not,
            "wildcard" => &mut self.wildcard,
            "word" => &mut self.word,
            "lemma" => &mut self.lemma,
            "tag" => &mut self.tag,
            "entity" => &mut self.entity,
            _ => return None,
        })
    }

    /// Overrides one entry by config key (`"not"`, `"quant*"`, `"lemma"`, ...).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let slot = self.slot(key).ok_or_else(|| Error::Config(format!("unknown cost key `{key}`")))?;
        *slot = value;
        Ok(())
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut copy = self.clone();
        Self::KEYS.iter().map(|k| (*k, *copy.slot(k).expect("known key"))).collect()
    }

    pub fn field(&self, field: Field) -> f64 {
        match field {
            Field::Word => self.word,
            Field::Lemma => self.lemma,
            Field::Tag => self.tag,
            Field::Entity => self.entity,
        }
    }

    pub fn quantifier(&self, q: Quantifier) -> f64 {
        match q {
            Quantifier::ZeroOrOne => self.optional,
            Quantifier::ZeroOrMore => self.star,
            Quantifier::OneOrMore => self.plus,
        }
    }

    /// Every cost finite and non-negative, and negation dearer than any field test.
    pub fn validate(&self) -> Result<()> {
        for (key, v) in self.entries() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("cost `{key}` must be a non-negative number, got {v}")));
            }
        }
        let max_field = Field::ALL.iter().map(|f| self.field(*f)).fold(0.0, f64::max);
        if self.not <= max_field {
            return Err(Error::Config(format!(
                "cost `not` ({}) must exceed every field cost ({max_field})",
                self.not
            )));
        }
        Ok(())
    }

    pub fn scaled(&self, c: f64) -> CostTable {
        let mut out = self.clone();
        for key in Self::KEYS {
            *out.slot(key).expect("known key") *= c;
        }
        out
    }
}

/// Sum of node costs over the whole tree, holes included.
pub fn static_cost(pattern: &Pattern, costs: &CostTable) -> f64 {
    match pattern {
        Pattern::Hole => costs.hole,
        Pattern::Token(c) => costs.token + constraint_cost(c, costs),
        Pattern::Concat(l, r) => costs.concat + static_cost(l, costs) + static_cost(r, costs),
        Pattern::Alternation(l, r) => costs.alternation + static_cost(l, costs) + static_cost(r, costs),
        Pattern::Quantified(p, q) => costs.quantifier(*q) + static_cost(p, costs),
    }
}

fn constraint_cost(c: &Constraint, costs: &CostTable) -> f64 {
    match c {
        Constraint::Hole => costs.hole,
        Constraint::Wildcard => costs.wildcard,
        Constraint::FieldIs(f, _) => costs.field(*f),
        Constraint::Not(x) => costs.not + constraint_cost(x, costs),
        Constraint::And(l, r) => costs.and + constraint_cost(l, costs) + constraint_cost(r, costs),
        Constraint::Or(l, r) => costs.or + constraint_cost(l, costs) + constraint_cost(r, costs),
    }
}

/// Prefers cheap candidates: the score is the negated static cost.
#[derive(Debug, Clone, Default)]
pub struct StaticScorer {
    pub costs: CostTable,
}

impl StaticScorer {
    pub fn new(costs: CostTable) -> Self {
        StaticScorer { costs }
    }
}

impl Scorer for StaticScorer {
    fn score_transition(&self, _current: &State, candidate: &State, _entry: &SpecEntry) -> Result<f64, ScorerError> {
        Ok(-static_cost(&candidate.pattern, &self.costs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::parse;

    fn cost(s: &str) -> f64 {
        static_cost(&parse(s).unwrap(), &CostTable::default())
    }

    #[test]
    fn summation() {
        assert_eq!(cost("HOLE HOLE"), 3.0);
        assert_eq!(cost("[word=son]"), 2.0);
        assert_eq!(cost("[!HOLE]"), 7.0);
        assert_eq!(cost("[]*"), 8.0);
        assert!((cost("[lemma=a | tag=b]") - 5.7).abs() < 1e-12);
    }

    #[test]
    fn config_keys() {
        let mut t = CostTable::default();
        t.set("quant*", 9.0).unwrap();
        t.set("NOT", 6.0).unwrap();
        assert_eq!((t.star, t.not), (9.0, 6.0));
        assert!(matches!(t.set("bogus", 1.0), Err(Error::Config(_))));
        assert!(t.validate().is_ok());
        t.not = 1.0;
        assert!(t.validate().is_err());
        t.not = 6.0;
        t.word = -1.0;
        assert!(t.validate().is_err());
        assert_eq!(CostTable::default().entries().len(), 15);
        assert_eq!(CostTable::default().scaled(2.0).entity, 3.0);
    }
}

use alloc::vec::Vec;

use super::{static_cost, CostTable, Scorer, ScorerError};
use crate::corpus::SpecEntry;
use crate::matcher;
use crate::pattern::{Pattern, State};

/// The hole-free part of a partial rule that can already be run: the rule
/// itself when complete, otherwise the longest complete prefix of its
/// top-level concatenation.
pub fn strip_holes(pattern: &Pattern) -> Option<Pattern> {
    if pattern.is_complete() {
        return Some(pattern.clone());
    }
    let prefix: Vec<Pattern> = pattern
        .concat_items()
        .into_iter()
        .take_while(|p| p.is_complete())
        .cloned()
        .collect();
    Pattern::concat_all(prefix)
}

/// Highlighted tokens the stripped rule matches minus non-highlighted
/// tokens it matches.
pub fn augmentation_reward(pattern: &Pattern, entry: &SpecEntry) -> i64 {
    let Some(stripped) = strip_holes(pattern) else {
        return 0;
    };
    let mut reward = 0i64;
    for span in matcher::scan(&stripped, entry.sentence().tokens()) {
        for i in span.start..span.end {
            reward += if entry.is_highlighted(i) { 1 } else { -1 };
        }
    }
    reward
}

/// Weight of the reward against the static cost. At 1.0 a bare wildcard
/// prefix earns enough reward to crowd out every specific constraint.
pub const DEFAULT_LAMBDA: f64 = 0.5;

/// Static cost plus `lambda` times the augmentation reward.
#[derive(Debug, Clone)]
pub struct AugmentedScorer {
    pub costs: CostTable,
    pub lambda: f64,
}

impl Default for AugmentedScorer {
    fn default() -> Self {
        AugmentedScorer { costs: CostTable::default(), lambda: DEFAULT_LAMBDA }
    }
}

impl AugmentedScorer {
    pub fn new(costs: CostTable, lambda: f64) -> Self {
        AugmentedScorer { costs, lambda }
    }
}

impl Scorer for AugmentedScorer {
    fn score_transition(&self, _current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        let reward = augmentation_reward(&candidate.pattern, entry) as f64;
        Ok(-static_cost(&candidate.pattern, &self.costs) + self.lambda * reward)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{sentence, Span};
    use crate::pattern::{parse, print};
    use alloc::vec;

    #[test]
    fn stripping() {
        let s = |t: &str| strip_holes(&parse(t).unwrap()).map(|p| print(&p));
        assert_eq!(s("[entity=person] [tag=NN] [HOLE]").as_deref(), Some("[entity=person] [tag=nn]"));
        assert_eq!(s("[word=a] HOLE [word=b]").as_deref(), Some("[word=a]"));
        assert_eq!(s("[word=a]").as_deref(), Some("[word=a]"));
        assert_eq!(s("HOLE [word=a]"), None);
        assert_eq!(s("[word=a]|HOLE"), None);
    }

    #[test]
    fn rewards() {
        let path = anderson_path();
        let entry = SpecEntry::new(path, vec![Span::new(0, 3)]).unwrap();
        let state = parse("[entity=person] [tag=NN] [HOLE]").unwrap();
        assert_eq!(augmentation_reward(&state, &entry), 2);
        assert_eq!(augmentation_reward(&Pattern::Hole, &entry), 0);

        let s = sentence("x", &["a/a/X/O", "b/b/X/O"], &[]);
        let half = SpecEntry::new(s, vec![Span::new(0, 1)]).unwrap();
        assert_eq!(augmentation_reward(&parse("[tag=x]").unwrap(), &half), 0);
        assert_eq!(augmentation_reward(&parse("[word=b]").unwrap(), &half), -1);
    }

    #[test]
    fn augmented_score() {
        let costs = CostTable::default();
        let entry = SpecEntry::new(anderson_path(), vec![Span::new(0, 3)]).unwrap();
        let cand = State::new(parse("[entity=person] HOLE").unwrap(), &costs, 3);
        let got = AugmentedScorer::default().score_transition(&State::root(&costs), &cand, &entry).unwrap();
        // Cost 1 + 2.5 + 1; the stripped prefix matches He and Anderson.
        assert_eq!(got, -4.5 + DEFAULT_LAMBDA * 2.0);
    }
}

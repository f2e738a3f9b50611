//! Best-first enumeration over partial rules.
//!
//! A single priority queue holds every scored state. Each iteration pops the
//! best one; a complete state is checked against the specification and
//! returned if it fits, a partial one has its leftmost hole expanded, the
//! children that can no longer cover the highlights are dropped, and the
//! rest are scored and queued. Equal scores leave the queue in insertion
//! order.

use alloc::collections::BinaryHeap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::corpus::Specification;
use crate::matcher;
use crate::pattern::{expansions, print, Pattern, State, Vocabulary};
use crate::scoring::{CostTable, Scorer};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Pop budget.
    pub max_states: usize,
    pub pruning: bool,
    pub record_trace: bool,
    /// Used to price states as they are built.
    pub costs: CostTable,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_states: 1000, pruning: true, record_trace: false, costs: CostTable::default() }
    }
}

/// One popped state.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub step: usize,
    pub state: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub rule: Option<Pattern>,
    pub found: bool,
    /// Pops, the root included.
    pub states_explored: usize,
    pub states_pruned: usize,
    pub queue_peak: usize,
    pub trace: Option<Vec<TraceEvent>>,
}

/// Hooks into the search loop.
pub trait SearchObserver {
    fn on_push(&mut self, _state: &State, _score: f64) {}

    /// `best_remaining` is the top score left in the queue after the pop.
    fn on_pop(&mut self, _step: usize, _state: &State, _score: f64, _best_remaining: Option<f64>) {}
}

impl SearchObserver for () {}

struct Queued {
    score: f64,
    seq: u64,
    state: State,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then_with(|| other.seq.cmp(&self.seq))
    }
}

pub fn synthesize<S: Scorer + ?Sized>(spec: &Specification, scorer: &S, config: &SearchConfig) -> Result<SearchReport> {
    synthesize_observed(spec, scorer, config, &mut ())
}

pub fn synthesize_observed<S: Scorer + ?Sized>(
    spec: &Specification,
    scorer: &S,
    config: &SearchConfig,
    observer: &mut dyn SearchObserver,
) -> Result<SearchReport> {
    if config.max_states == 0 {
        return Err(Error::Config("max states must be at least 1".to_string()));
    }
    let vocab = Vocabulary::from_spec(spec);
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let root = State::root(&config.costs);
    observer.on_push(&root, 0.0);
    heap.push(Queued { score: 0.0, seq, state: root });
    let mut report = SearchReport {
        rule: None,
        found: false,
        states_explored: 0,
        states_pruned: 0,
        queue_peak: 1,
        trace: config.record_trace.then(Vec::new),
    };

    while let Some(Queued { score, state, .. }) = heap.pop() {
        report.states_explored += 1;
        let step = report.states_explored;
        observer.on_pop(step, &state, score, heap.peek().map(|q| q.score));
        if let Some(trace) = report.trace.as_mut() {
            trace.push(TraceEvent { step, state: print(&state.pattern), score });
        }
        log::trace!("pop {step}: {} ({score})", print(&state.pattern));

        if state.is_complete() {
            if matcher::check_spec(&state.pattern, spec)? {
                report.found = true;
                report.rule = Some(state.pattern);
                return Ok(report);
            }
        } else if step < config.max_states {
            let mut kids = expansions(&state, &vocab, &config.costs)?;
            if config.pruning {
                let before = kids.len();
                kids.retain(|k| !matcher::prune_check(&k.pattern, spec));
                report.states_pruned += before - kids.len();
            }
            let scores = scorer
                .score_candidates(&state, &kids, spec)
                .map_err(|e| Error::Scorer { state: print(&state.pattern), message: e.0 })?;
            if scores.len() != kids.len() {
                return Err(Error::Scorer {
                    state: print(&state.pattern),
                    message: alloc::format!("expected {} scores, got {}", kids.len(), scores.len()),
                });
            }
            for (kid, s) in kids.into_iter().zip(scores) {
                if s.is_nan() {
                    return Err(Error::Scorer { state: print(&state.pattern), message: "score is NaN".to_string() });
                }
                seq += 1;
                observer.on_push(&kid, s);
                heap.push(Queued { score: s, seq, state: kid });
            }
            report.queue_peak = report.queue_peak.max(heap.len());
        }
        if step >= config.max_states {
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::*;
    use crate::corpus::{sentence, Span, SpecEntry, SpecMode};
    use crate::scoring::{AugmentedScorer, ScorerError, StaticScorer};
    use alloc::vec;

    fn spec_of(entries: Vec<SpecEntry>, mode: SpecMode) -> Specification {
        Specification::new(entries, mode).unwrap()
    }

    fn anderson_path_spec() -> Specification {
        spec_of(vec![SpecEntry::new(anderson_path(), vec![Span::new(0, 3)]).unwrap()], SpecMode::SimplifiedSyntax)
    }

    #[test]
    fn solves_anderson_path() {
        let report = synthesize(&anderson_path_spec(), &AugmentedScorer::default(), &SearchConfig::default()).unwrap();
        assert!(report.found, "{report:?}");
        let rule = report.rule.unwrap();
        assert!(matcher::check_spec(&rule, &anderson_path_spec()).unwrap());
        assert!(report.states_explored <= 1000);
    }

    #[test]
    fn budget_of_one() {
        let cfg = SearchConfig { max_states: 1, ..SearchConfig::default() };
        let r = synthesize(&anderson_path_spec(), &StaticScorer::default(), &cfg).unwrap();
        assert!(!r.found);
        assert_eq!(r.states_explored, 1);
        assert!(synthesize(&anderson_path_spec(), &StaticScorer::default(), &SearchConfig { max_states: 0, ..cfg }).is_err());
    }

    #[test]
    fn counter_example_only() {
        let s = sentence("n", &["a/a/X/O", "b/b/X/O"], &[]);
        let spec = spec_of(vec![SpecEntry::new(s, vec![]).unwrap()], SpecMode::Surface);
        let r = synthesize(&spec, &StaticScorer::default(), &SearchConfig::default()).unwrap();
        assert!(r.found);
        assert!(matcher::check_spec(r.rule.as_ref().unwrap(), &spec).unwrap());
    }

    struct Failing;

    impl Scorer for Failing {
        fn score_transition(&self, _: &State, _: &State, _: &SpecEntry) -> core::result::Result<f64, ScorerError> {
            Err(ScorerError("boom".into()))
        }
    }

    #[test]
    fn scorer_errors_name_the_state() {
        let err = synthesize(&anderson_path_spec(), &Failing, &SearchConfig::default()).unwrap_err();
        assert_eq!(err, Error::Scorer { state: "HOLE".into(), message: "boom".into() });
    }

    struct Recorder {
        pops: Vec<(f64, Option<f64>)>,
    }

    impl SearchObserver for Recorder {
        fn on_pop(&mut self, _: usize, _: &State, score: f64, rest: Option<f64>) {
            self.pops.push((score, rest));
        }
    }

    #[test]
    fn every_pop_is_the_queue_maximum() {
        let mut rec = Recorder { pops: vec![] };
        let spec = spec_of(vec![SpecEntry::new(anderson(), vec![Span::new(0, 10)]).unwrap()], SpecMode::Surface);
        let cfg = SearchConfig { max_states: 300, record_trace: true, ..SearchConfig::default() };
        let r = synthesize_observed(&spec, &StaticScorer::default(), &cfg, &mut rec).unwrap();
        assert_eq!(rec.pops.len(), r.states_explored);
        assert!(rec.pops.iter().all(|(s, rest)| rest.is_none_or(|m| *s >= m)));
        let trace = r.trace.unwrap();
        assert_eq!(trace[0], TraceEvent { step: 1, state: "HOLE".into(), score: 0.0 });
        assert_eq!(trace.len(), r.states_explored);
    }

    #[test]
    fn budget_monotone() {
        let spec = anderson_path_spec();
        let full = synthesize(&spec, &StaticScorer::default(), &SearchConfig::default()).unwrap();
        assert!(full.found);
        for budget in [full.states_explored, full.states_explored + 1, 5000] {
            let cfg = SearchConfig { max_states: budget, ..SearchConfig::default() };
            let r = synthesize(&spec, &StaticScorer::default(), &cfg).unwrap();
            assert_eq!((r.found, r.states_explored, &r.rule), (true, full.states_explored, &full.rule));
        }
        let short = SearchConfig { max_states: full.states_explored - 1, ..SearchConfig::default() };
        assert!(!synthesize(&spec, &StaticScorer::default(), &short).unwrap().found);
    }
}

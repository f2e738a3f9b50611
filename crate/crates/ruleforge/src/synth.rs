//! The synthesis job shared by the CLI and the service.

use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use ruleforge_core::corpus::Specification;
use ruleforge_core::matcher::find_matches;
use ruleforge_core::pattern::{print, State};
use ruleforge_core::scoring::{AugmentedScorer, ContextualScorer, Scorer, StaticScorer};
use ruleforge_core::search::{synthesize_observed, SearchConfig, SearchObserver, SearchReport, TraceEvent};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::remote::RemoteScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScorerKind {
    Static,
    Augmented,
    Contextual,
    Remote,
}

impl FromStr for ScorerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ScorerKind> {
        match s {
            "static" => Ok(ScorerKind::Static),
            "augmented" => Ok(ScorerKind::Augmented),
            "contextual" => Ok(ScorerKind::Contextual),
            "remote" => Ok(ScorerKind::Remote),
            other => Err(Error::Invalid(format!(
                "unknown scorer `{other}` (expected static, augmented, contextual or remote)"
            ))),
        }
    }
}

pub type SharedScorer = Arc<dyn Scorer + Send + Sync>;

pub fn build_scorer(kind: ScorerKind, config: &Config, model: Option<&Arc<ContextualScorer>>) -> Result<SharedScorer> {
    Ok(match kind {
        ScorerKind::Static => Arc::new(StaticScorer::new(config.costs.clone())),
        ScorerKind::Augmented => Arc::new(AugmentedScorer::new(config.costs.clone(), config.lambda)),
        ScorerKind::Contextual => match model {
            Some(m) => m.clone(),
            None => return Err(Error::Invalid("the contextual scorer needs a model".into())),
        },
        ScorerKind::Remote => match &config.remote_endpoint {
            Some(url) => Arc::new(RemoteScorer::new(url.clone(), Duration::from_millis(config.remote_timeout_ms))),
            None => return Err(Error::Invalid("the remote scorer needs an endpoint".into())),
        },
    })
}

/// What `synth` prints and `/api/synthesize` returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthReport {
    pub found: bool,
    pub rule: Option<String>,
    pub states_explored: usize,
    pub states_pruned: usize,
    pub queue_peak: usize,
    /// Spans the rule matches in each entry, in entry order.
    pub matches: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceLine {
    pub step: usize,
    pub state: String,
    /// `null` when the score is not finite.
    pub score: Option<f64>,
}

impl From<&TraceEvent> for TraceLine {
    fn from(e: &TraceEvent) -> Self {
        TraceLine { step: e.step, state: e.state.clone(), score: e.score.is_finite().then_some(e.score) }
    }
}

pub fn report_of(search: &SearchReport, spec: &Specification) -> Result<SynthReport> {
    let matches = match &search.rule {
        Some(rule) => spec
            .entries()
            .iter()
            .map(|e| Ok(find_matches(rule, e.sentence())?.spans().iter().map(|s| (s.start, s.end)).collect()))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    Ok(SynthReport {
        found: search.found,
        rule: search.rule.as_ref().map(print),
        states_explored: search.states_explored,
        states_pruned: search.states_pruned,
        queue_peak: search.queue_peak,
        matches,
    })
}

/// Forwards every pop to a callback.
struct OnPop<F>(F);

impl<F: FnMut(TraceLine)> SearchObserver for OnPop<F> {
    fn on_pop(&mut self, step: usize, state: &State, score: f64, _best: Option<f64>) {
        (self.0)(TraceLine { step, state: print(&state.pattern), score: score.is_finite().then_some(score) });
    }
}

/// Runs one search, reporting each popped state to `on_pop`.
pub fn run(
    spec: &Specification,
    scorer: &dyn Scorer,
    config: &SearchConfig,
    on_pop: impl FnMut(TraceLine),
) -> Result<(SearchReport, SynthReport)> {
    let search = synthesize_observed(spec, scorer, config, &mut OnPop(on_pop))?;
    let report = report_of(&search, spec)?;
    Ok((search, report))
}

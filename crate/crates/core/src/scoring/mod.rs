//! Ranking candidate states.
//!
//! Every strategy implements [`Scorer`]: given the state being expanded, one
//! candidate child and one specification entry, return a number where
//! higher means "expand this first". Multi-entry specifications average the
//! per-entry scores.

mod augment;
mod costs;
mod features;
mod model;
mod train;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::corpus::{SpecEntry, Specification};
use crate::pattern::State;

pub use augment::{augmentation_reward, strip_holes, AugmentedScorer, DEFAULT_LAMBDA};
pub use costs::{static_cost, CostTable, StaticScorer};
pub use features::{featurize, Features, DEFAULT_DIM};
pub use model::{contextual_score, ContextualScorer, ScorerModel, StageMeta, TrainingMeta, MODEL_VERSION};
pub use train::{held_out_metrics, train_contextual, HeldOutMetrics, Stage, TrainConfig, TrainingExample};

/// A scorer could not produce a value (remote transport failure, bad
/// response, non-finite output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScorerError(pub String);

impl fmt::Display for ScorerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl core::error::Error for ScorerError {}

pub trait Scorer {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError>;

    /// Scores every sibling against the whole specification. The default
    /// averages [`Scorer::score_transition`] over entries; implementations
    /// override it to batch work shared between siblings.
    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        candidates
            .iter()
            .map(|c| score_transition_multi(self, current, c, spec))
            .collect()
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        (**self).score_transition(current, candidate, entry)
    }

    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).score_candidates(current, candidates, spec)
    }
}

impl<S: Scorer + ?Sized> Scorer for alloc::boxed::Box<S> {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        (**self).score_transition(current, candidate, entry)
    }

    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).score_candidates(current, candidates, spec)
    }
}

impl<S: Scorer + ?Sized> Scorer for alloc::sync::Arc<S> {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        (**self).score_transition(current, candidate, entry)
    }

    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        (**self).score_candidates(current, candidates, spec)
    }
}

/// Mean of the per-entry scores.
pub fn score_transition_multi<S: Scorer + ?Sized>(
    scorer: &S,
    current: &State,
    candidate: &State,
    spec: &Specification,
) -> Result<f64, ScorerError> {
    let entries = spec.entries();
    let mut total = 0.0;
    for entry in entries {
        total += scorer.score_transition(current, candidate, entry)?;
    }
    Ok(total / entries.len() as f64)
}

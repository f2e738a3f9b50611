use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::features::{align, current_part, dot, entry_part, state_part, transition_part, Features};
use super::{Scorer, ScorerError};
use crate::corpus::{SpecEntry, Specification};
use crate::pattern::State;
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// One curriculum stage as it was actually run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageMeta {
    pub name: String,
    pub epochs: usize,
    pub examples: usize,
    /// Mean logistic loss over the last epoch of the stage.
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainingMeta {
    pub seed: u64,
    pub lr_low: f64,
    pub lr_high: f64,
    pub lr_scale: f64,
    pub batch_size: usize,
    pub stages: Vec<StageMeta>,
}

/// Logistic model over hashed features.
#[derive(Debug, Clone, PartialEq)]
pub struct ScorerModel {
    pub version: u32,
    pub dim: usize,
    pub bias: f64,
    pub weights: Vec<f64>,
    pub meta: TrainingMeta,
}

impl ScorerModel {
    /// All-zero weights: every transition scores 0.5.
    pub fn zeros(dim: usize) -> Result<ScorerModel> {
        let model = ScorerModel { version: MODEL_VERSION, dim, bias: 0.0, weights: vec![0.0; dim], meta: TrainingMeta::default() };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Config(alloc::format!("unsupported model version {}", self.version)));
        }
        if !self.dim.is_power_of_two() {
            return Err(Error::Config(alloc::format!("model dim {} is not a power of two", self.dim)));
        }
        if self.weights.len() != self.dim {
            return Err(Error::Config(alloc::format!(
                "model has {} weights for dim {}",
                self.weights.len(),
                self.dim
            )));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::Config("model weights must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn logit(&self, indices: &[u32]) -> f64 {
        self.bias + dot(indices, &self.weights)
    }
}

/// Logistic function kept strictly inside `(0, 1)` even when it saturates.
pub(crate) fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Probability that the transition is the right one.
pub fn contextual_score(model: &ScorerModel, features: &Features) -> f64 {
    sigmoid(model.logit(features.indices()))
}

/// Learned scorer. Scores are probabilities in `(0, 1)`.
#[derive(Debug, Clone)]
pub struct ContextualScorer {
    model: ScorerModel,
}

impl ContextualScorer {
    pub fn new(model: ScorerModel) -> Result<Self> {
        model.validate()?;
        Ok(ContextualScorer { model })
    }

    pub fn model(&self) -> &ScorerModel {
        &self.model
    }
}

fn finite(p: f64) -> Result<f64, ScorerError> {
    if p.is_finite() {
        Ok(p)
    } else {
        Err(ScorerError(String::from("contextual score is not finite")))
    }
}

impl Scorer for ContextualScorer {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        finite(contextual_score(&self.model, &super::featurize(current, candidate, entry, self.model.dim)))
    }

    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        let dim = self.model.dim;
        let w = &self.model.weights;
        let cur = current_part(current, dim);
        let shared = self.model.bias + dot(&cur.indices, w);
        let cand_dots: Vec<f64> = candidates.iter().map(|c| dot(&state_part("2", &c.pattern, dim), w)).collect();
        let mut totals = vec![0.0; candidates.len()];
        for entry in spec.entries() {
            let base = shared + dot(&entry_part(entry, dim).indices, w);
            let al = align(&cur, entry);
            for ((c, cd), total) in candidates.iter().zip(&cand_dots).zip(totals.iter_mut()) {
                let z = base + cd + dot(&transition_part(&cur, &al, c, entry, dim), w);
                *total += sigmoid(z);
            }
        }
        let n = spec.entries().len() as f64;
        totals.into_iter().map(|t| finite(t / n)).collect()
    }
}

//! Scorer that asks an HTTP endpoint. One request per spec entry carries
//! every sibling candidate; the scores are averaged over entries.

use std::time::Duration;

use ruleforge_core::corpus::{SpecEntry, Specification};
use ruleforge_core::pattern::{print, State};
use ruleforge_core::scoring::{Scorer, ScorerError};
use serde::{Deserialize, Serialize};

use crate::formats::{entry_to_json, EntryJson};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub current: String,
    pub candidates: Vec<String>,
    pub entry: EntryJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub scores: Vec<f64>,
}

pub struct RemoteScorer {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteScorer {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> RemoteScorer {
        let agent = ureq::AgentBuilder::new().timeout(timeout).build();
        RemoteScorer { endpoint: endpoint.into(), agent }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn call(&self, current: &State, candidates: &[State], entry: &SpecEntry) -> Result<Vec<f64>, ScorerError> {
        let request = ScoreRequest {
            current: print(&current.pattern),
            candidates: candidates.iter().map(|c| print(&c.pattern)).collect(),
            entry: entry_to_json(entry),
        };
        let response = self
            .agent
            .post(&self.endpoint)
            .send_json(&request)
            .map_err(|e| ScorerError(format!("remote scorer {}: {e}", self.endpoint)))?;
        let body: ScoreResponse = response
            .into_json()
            .map_err(|e| ScorerError(format!("remote scorer {}: bad response: {e}", self.endpoint)))?;
        if body.scores.len() != candidates.len() {
            return Err(ScorerError(format!(
                "remote scorer {}: expected {} scores, got {}",
                self.endpoint,
                candidates.len(),
                body.scores.len()
            )));
        }
        if body.scores.iter().any(|s| s.is_nan()) {
            return Err(ScorerError(format!("remote scorer {}: NaN score", self.endpoint)));
        }
        Ok(body.scores)
    }
}

impl Scorer for RemoteScorer {
    fn score_transition(&self, current: &State, candidate: &State, entry: &SpecEntry) -> Result<f64, ScorerError> {
        Ok(self.call(current, std::slice::from_ref(candidate), entry)?[0])
    }

    fn score_candidates(
        &self,
        current: &State,
        candidates: &[State],
        spec: &Specification,
    ) -> Result<Vec<f64>, ScorerError> {
        if candidates.is_empty() {
            return Ok(Vec::new());
        }
        let mut totals = vec![0.0; candidates.len()];
        for entry in spec.entries() {
            for (t, s) in totals.iter_mut().zip(self.call(current, candidates, entry)?) {
                *t += s;
            }
        }
        let n = spec.entries().len() as f64;
        Ok(totals.into_iter().map(|t| t / n).collect())
    }
}

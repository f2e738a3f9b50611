use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::corpus::{AnnotatedSentence, Span, SpecEntry, SpecMode, Specification};
use crate::matcher;
use crate::pattern::Pattern;
use crate::scoring::Scorer;
use crate::search::{synthesize, SearchConfig};
use crate::{Error, Result};

pub const NO_RELATION: &str = "no_relation";

/// A sentence with a subject and an object entity.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSentence {
    pub sentence: AnnotatedSentence,
    pub subj: Span,
    pub subj_type: String,
    pub obj: Span,
    pub obj_type: String,
    pub gold: String,
}

impl EpisodeSentence {
    pub fn validate(&self) -> Result<()> {
        self.subj.check(self.sentence.len())?;
        self.obj.check(self.sentence.len())?;
        if self.subj.start < self.obj.end && self.obj.start < self.subj.end {
            return Err(Error::Episode(format!("{}: subject and object overlap", self.sentence.id())));
        }
        if self.subj_type.is_empty() || self.obj_type.is_empty() {
            return Err(Error::Episode(format!("{}: empty entity type", self.sentence.id())));
        }
        Ok(())
    }

    fn same_types(&self, other: &EpisodeSentence) -> bool {
        self.subj_type == other.subj_type && self.obj_type == other.obj_type
    }

    /// The text a rule is tested on and the span it must match exactly.
    pub fn view(&self, mode: SpecMode) -> Result<(AnnotatedSentence, Span)> {
        match mode {
            SpecMode::Surface => Ok((self.sentence.clone(), self.subj.hull(self.obj))),
            SpecMode::SimplifiedSyntax => {
                let path = self.sentence.path_sentence(self.subj, self.obj)?;
                let len = path.len();
                Ok((path, Span::new(0, len)))
            }
        }
    }
}

/// N-way K-shot trial. Relations keep their file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub way: usize,
    pub shot: usize,
    pub support: Vec<(String, Vec<EpisodeSentence>)>,
    pub queries: Vec<EpisodeSentence>,
}

impl Episode {
    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.way {
            return Err(Error::Episode(format!("{} relations for a {}-way episode", self.support.len(), self.way)));
        }
        for (label, sents) in &self.support {
            if label == NO_RELATION {
                return Err(Error::Episode("no_relation cannot be a support relation".into()));
            }
            if sents.len() != self.shot {
                return Err(Error::Episode(format!("relation {label}: {} supports for {}-shot", sents.len(), self.shot)));
            }
            sents.iter().try_for_each(EpisodeSentence::validate)?;
        }
        for q in &self.queries {
            q.validate()?;
            if q.gold != NO_RELATION && !self.support.iter().any(|(l, _)| *l == q.gold) {
                return Err(Error::Episode(format!("query {} has unknown gold label {}", q.sentence.id(), q.gold)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FewShotConfig {
    pub search: SearchConfig,
    /// Add the other relations' supports as entries that must not match.
    pub negative_supports: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationRule {
    pub label: String,
    pub rule: Option<Pattern>,
    pub states_explored: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FewShotOutcome {
    pub rules: Vec<RelationRule>,
    /// One label per query, in query order.
    pub predictions: Vec<String>,
}

fn relation_spec(episode: &Episode, index: usize, mode: SpecMode, negatives: bool) -> Result<Specification> {
    let mut entries = Vec::new();
    for (label_index, (_, sents)) in episode.support.iter().enumerate() {
        let own = label_index == index;
        if !own && !negatives {
            continue;
        }
        for s in sents {
            let (sentence, span) = s.view(mode)?;
            let selections = if own { vec![span] } else { Vec::new() };
            entries.push(SpecEntry::new(sentence, selections)?);
        }
    }
    Specification::new(entries, mode)
}

/// Synthesizes one rule per relation from its supports, then labels each
/// query with the relation whose rule matches the query's entity span (or
/// path) exactly. Several matches go to the rule with the most token
/// patterns, then to the smallest label.
pub fn fewshot_predict<S: Scorer + ?Sized>(
    episode: &Episode,
    mode: SpecMode,
    scorer: &S,
    config: &FewShotConfig,
) -> Result<FewShotOutcome> {
    episode.validate()?;
    let mut rules = Vec::new();
    for (i, (label, _)) in episode.support.iter().enumerate() {
        let spec = relation_spec(episode, i, mode, config.negative_supports)?;
        let report = synthesize(&spec, scorer, &config.search)?;
        rules.push(RelationRule { label: label.clone(), rule: report.rule, states_explored: report.states_explored });
    }
    let mut predictions = Vec::with_capacity(episode.queries.len());
    for q in &episode.queries {
        let (sentence, span) = q.view(mode)?;
        let mut best: Option<(&RelationRule, usize)> = None;
        for r in &rules {
            let Some(rule) = &r.rule else { continue };
            if !matcher::matches_exact(rule, &sentence, span)? {
                continue;
            }
            let specificity = rule.token_pattern_count();
            let better = best.is_none_or(|(b, bs)| specificity > bs || (specificity == bs && r.label < b.label));
            if better {
                best = Some((r, specificity));
            }
        }
        predictions.push(best.map_or(NO_RELATION.to_string(), |(r, _)| r.label.clone()));
    }
    Ok(FewShotOutcome { rules, predictions })
}

/// Sampling weights for one query: each relation weighs the number of its
/// supports with the query's entity types (in order); `no_relation` weighs
/// 1 when some background sentence has those types.
pub fn baseline_weights(episode: &Episode, background: &[EpisodeSentence], query: &EpisodeSentence) -> Vec<(String, f64)> {
    let mut weights: Vec<(String, f64)> = episode
        .support
        .iter()
        .map(|(label, sents)| (label.clone(), sents.iter().filter(|s| s.same_types(query)).count() as f64))
        .filter(|(_, w)| *w > 0.0)
        .collect();
    if background.iter().any(|b| b.same_types(query)) {
        weights.push((NO_RELATION.to_string(), 1.0));
    }
    weights
}

/// Type-matching random baseline.
pub fn baseline_predict(episode: &Episode, background: &[EpisodeSentence], rng: &mut impl Rng) -> Vec<String> {
    episode
        .queries
        .iter()
        .map(|q| {
            let weights = baseline_weights(episode, background, q);
            let total: f64 = weights.iter().map(|(_, w)| w).sum();
            if total <= 0.0 {
                return NO_RELATION.to_string();
            }
            let mut r = rng.gen::<f64>() * total;
            for (label, w) in &weights {
                if r < *w {
                    return label.clone();
                }
                r -= w;
            }
            weights.last().expect("positive total").0.clone()
        })
        .collect()
}

/// Micro-averaged F1 over every label except `no_relation`.
pub fn micro_f1<P: AsRef<str>, G: AsRef<str>>(predictions: &[P], golds: &[G]) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (p, g) in predictions.iter().zip(golds) {
        let (p, g) = (p.as_ref(), g.as_ref());
        if p == g {
            if g != NO_RELATION {
                tp += 1;
            }
            continue;
        }
        if p != NO_RELATION {
            fp += 1;
        }
        if g != NO_RELATION {
            fn_ += 1;
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

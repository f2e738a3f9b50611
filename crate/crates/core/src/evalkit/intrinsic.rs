use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::hash::Fnv;
use crate::pattern::{print, Pattern, State};
use crate::corpus::SpecEntry;
use crate::scoring::{Scorer, ScorerError};
use crate::search::{synthesize, SearchConfig};
use crate::selfsup::GeneratedItem;
use crate::Result;

/// Knows the answer: a candidate that can still become the target scores
/// `+inf`, anything else 0.
#[derive(Debug, Clone)]
pub struct OracleScorer {
    target: Pattern,
}

impl OracleScorer {
    pub fn new(target: &Pattern) -> Self {
        OracleScorer { target: target.canonicalize() }
    }
}

impl Scorer for OracleScorer {
    fn score_transition(&self, _: &State, candidate: &State, _: &SpecEntry) -> Result<f64, ScorerError> {
        Ok(if candidate.pattern.generalizes(&self.target) { f64::INFINITY } else { 0.0 })
    }
}

/// Pseudo-random but reproducible: hashes the seed with the candidate text.
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    pub seed: u64,
}

impl Scorer for RandomScorer {
    fn score_transition(&self, _: &State, candidate: &State, _: &SpecEntry) -> Result<f64, ScorerError> {
        let h = Fnv::new().write(&self.seed.to_le_bytes()).part(&print(&candidate.pattern)).finish();
        Ok((h >> 11) as f64 / (1u64 << 53) as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicRow {
    pub index: usize,
    pub found: bool,
    /// Transitions taken: states explored minus the root.
    pub steps: usize,
    /// Oracle derivation length of the item's own rule.
    pub ceiling: usize,
    /// Oracle derivation length of the rule the search returned, which is
    /// what actually bounds `steps` from below.
    pub found_ceiling: Option<usize>,
    pub rule: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub avg: f64,
    pub median: f64,
    pub max: f64,
    pub min: f64,
}

impl Stats {
    pub fn of(values: &[usize]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v: Vec<usize> = values.to_vec();
        v.sort_unstable();
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] as f64 } else { (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0 };
        Some(Stats {
            avg: v.iter().sum::<usize>() as f64 / n as f64,
            median,
            max: v[n - 1] as f64,
            min: v[0] as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicReport {
    pub total: usize,
    pub found: usize,
    /// Over solved items only.
    pub steps: Option<Stats>,
    /// Over all items.
    pub ceiling: Option<Stats>,
    /// Solved items that took fewer steps than their own rule's ceiling
    /// (the search found a different, shorter rule).
    pub below_ceiling: usize,
    pub rows: Vec<IntrinsicRow>,
}

pub const REPORT_NOTE: &str = "steps over solved items only; ceiling over all items";

pub fn intrinsic_row<S: Scorer + ?Sized>(item: &GeneratedItem, scorer: &S, config: &SearchConfig) -> Result<IntrinsicRow> {
    let report = synthesize(&item.spec, scorer, config)?;
    let found_ceiling = match &report.rule {
        Some(rule) => Some(crate::selfsup::oracle_derivation(rule, &item.spec, &config.costs)?.len()),
        None => None,
    };
    Ok(IntrinsicRow {
        index: item.index,
        found: report.found,
        steps: report.states_explored.saturating_sub(1),
        ceiling: item.ceiling(),
        found_ceiling,
        rule: report.rule.as_ref().map(print),
    })
}

pub fn summarize(rows: Vec<IntrinsicRow>) -> IntrinsicReport {
    let solved: Vec<&IntrinsicRow> = rows.iter().filter(|r| r.found).collect();
    let steps: Vec<usize> = solved.iter().map(|r| r.steps).collect();
    let ceilings: Vec<usize> = rows.iter().map(|r| r.ceiling).collect();
    IntrinsicReport {
        total: rows.len(),
        found: solved.len(),
        steps: Stats::of(&steps),
        ceiling: Stats::of(&ceilings),
        below_ceiling: solved.iter().filter(|r| r.steps < r.ceiling).count(),
        rows,
    }
}

/// Runs the search on every item's specification.
pub fn intrinsic_eval<S: Scorer + ?Sized>(
    items: &[GeneratedItem],
    scorer: &S,
    config: &SearchConfig,
) -> Result<IntrinsicReport> {
    let rows = items.iter().map(|item| intrinsic_row(item, scorer, config)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(rows))
}

impl IntrinsicReport {
    /// Aligned plain-text summary.
    pub fn table(&self, label: &str) -> String {
        let mut out = String::new();
        let fmt = |s: Option<Stats>, pick: fn(&Stats) -> f64| s.map_or(String::from("-"), |s| format!("{:.2}", pick(&s)));
        let rows: [(&str, String); 10] = [
            ("Rules found", format!("{}/{}", self.found, self.total)),
            ("Ceiling avg", fmt(self.ceiling, |s| s.avg)),
            ("Ceiling median", fmt(self.ceiling, |s| s.median)),
            ("Ceiling max", fmt(self.ceiling, |s| s.max)),
            ("Ceiling min", fmt(self.ceiling, |s| s.min)),
            ("Steps avg", fmt(self.steps, |s| s.avg)),
            ("Steps median", fmt(self.steps, |s| s.median)),
            ("Steps max", fmt(self.steps, |s| s.max)),
            ("Steps min", fmt(self.steps, |s| s.min)),
            ("Below own ceiling", format!("{}", self.below_ceiling)),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let _ = writeln!(out, "# {REPORT_NOTE}");
        let _ = writeln!(out, "{:width$}  {}", "", label);
        for (k, v) in rows {
            let _ = writeln!(out, "{k:width$}  {v:>w$}", w = label.len().max(1));
        }
        out
    }
}

//! Evaluation harnesses: search efficiency on generated items, and few-shot
//! relation extraction with synthesized rules.

mod fewshot;
mod intrinsic;

pub use fewshot::{
    baseline_predict, baseline_weights, fewshot_predict, micro_f1, Episode, EpisodeSentence, FewShotConfig,
    FewShotOutcome, RelationRule, NO_RELATION,
};
pub use intrinsic::{
    intrinsic_eval, intrinsic_row, summarize, IntrinsicReport, IntrinsicRow, OracleScorer, RandomScorer, Stats, REPORT_NOTE,
};

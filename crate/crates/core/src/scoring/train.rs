use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::{align, current_part, entry_part, state_part, transition_part};
use super::model::{sigmoid, StageMeta, TrainingMeta};
use super::ScorerModel;
use crate::corpus::SpecEntry;
use crate::pattern::State;
use crate::{Error, Result};

/// One labelled transition: `label` is true for the sibling on the Oracle
/// path, false for the others.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub entry: SpecEntry,
    pub current: State,
    pub candidate: State,
    pub label: bool,
    pub item: usize,
    pub step: usize,
}

/// Curriculum stage: examples whose entry has fewer than `max_tokens`
/// tokens and fewer than `max_highlighted` highlighted tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: String,
    pub max_tokens: Option<usize>,
    pub max_highlighted: Option<usize>,
    pub epochs: usize,
}

impl Stage {
    fn admits(&self, e: &SpecEntry) -> bool {
        self.max_tokens.is_none_or(|m| e.sentence().len() < m)
            && self.max_highlighted.is_none_or(|m| e.highlighted_count() < m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub seed: u64,
    pub lr_low: f64,
    pub lr_high: f64,
    /// Multiplies both bounds.
    pub lr_scale: f64,
    pub batch_size: usize,
    /// Batches from the low to the high bound of one cycle.
    pub half_cycle: usize,
    pub stages: Vec<Stage>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let stage = |name: &str, t, h, epochs| Stage {
            name: String::from(name),
            max_tokens: t,
            max_highlighted: h,
            epochs,
        };
        TrainConfig {
            dim: super::DEFAULT_DIM,
            seed: 0,
            lr_low: 6e-6,
            lr_high: 3e-5,
            lr_scale: 2e4,
            batch_size: 256,
            half_cycle: 400,
            stages: vec![
                stage("short", Some(20), Some(5), 3),
                stage("medium", Some(30), Some(7), 2),
                stage("all", None, None, 1),
            ],
        }
    }
}

impl TrainConfig {
    /// Triangular schedule whose amplitude halves every cycle.
    pub fn learning_rate(&self, batch: usize) -> f64 {
        let half = self.half_cycle.max(1) as f64;
        let it = batch as f64;
        let cycle = libm::floor(1.0 + it / (2.0 * half));
        let x = libm::fabs(it / half - 2.0 * cycle + 1.0);
        let amp = (1.0 - x).max(0.0) / libm::pow(2.0, cycle - 1.0);
        (self.lr_low + (self.lr_high - self.lr_low) * amp) * self.lr_scale
    }

    fn validate(&self) -> Result<()> {
        if !self.dim.is_power_of_two() {
            return Err(Error::Config(alloc::format!("dim {} is not a power of two", self.dim)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !(self.lr_low >= 0.0 && self.lr_high >= self.lr_low && self.lr_scale > 0.0) {
            return Err(Error::Config("learning rate bounds must satisfy 0 <= low <= high".into()));
        }
        Ok(())
    }
}

/// Examples with their features, sharing the current-state and entry parts
/// between siblings.
struct Encoded {
    shared: Vec<Vec<u32>>,
    rows: Vec<Row>,
}

struct Row {
    group: usize,
    own: Vec<u32>,
    label: bool,
}

fn encode(examples: &[TrainingExample], dim: usize) -> Encoded {
    let mut shared: Vec<Vec<u32>> = Vec::new();
    let mut rows = Vec::with_capacity(examples.len());
    let mut prev: Option<&TrainingExample> = None;
    let mut ctx = None;
    for ex in examples {
        let same = prev.is_some_and(|p| {
            p.item == ex.item && p.step == ex.step && p.current.pattern == ex.current.pattern && p.entry == ex.entry
        });
        if !same {
            let cur = current_part(&ex.current, dim);
            let al = align(&cur, &ex.entry);
            let mut s = cur.indices.clone();
            s.extend(entry_part(&ex.entry, dim).indices);
            shared.push(s);
            ctx = Some((cur, al));
        }
        let (cur, al) = ctx.as_ref().expect("set on first example");
        let mut own = state_part("2", &ex.candidate.pattern, dim);
        own.extend(transition_part(cur, al, &ex.candidate, &ex.entry, dim));
        rows.push(Row { group: shared.len() - 1, own, label: ex.label });
        prev = Some(ex);
    }
    Encoded { shared, rows }
}

fn logit(model: &ScorerModel, enc: &Encoded, r: &Row) -> f64 {
    model.logit(&enc.shared[r.group]) + super::features::dot(&r.own, &model.weights)
}

fn log_loss(p: f64, label: bool) -> f64 {
    let p = p.clamp(1e-12, 1.0 - 1e-12);
    if label {
        -libm::log(p)
    } else {
        -libm::log(1.0 - p)
    }
}

/// Trains the contextual scorer through the configured curriculum.
/// Stages that admit no example are skipped with a warning.
pub fn train_contextual(dataset: &[TrainingExample], config: &TrainConfig) -> Result<ScorerModel> {
    config.validate()?;
    let mut model = ScorerModel::zeros(config.dim)?;
    let enc = encode(dataset, config.dim);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut batch_no = 0usize;
    let mut stages = Vec::new();
    let mut grads: Vec<(u32, f64)> = Vec::new();
    for stage in &config.stages {
        let mut order: Vec<usize> = (0..dataset.len()).filter(|&i| stage.admits(&dataset[i].entry)).collect();
        if order.is_empty() {
            log::warn!("curriculum stage `{}` admits no examples; skipping", stage.name);
            stages.push(StageMeta { name: stage.name.clone(), epochs: 0, examples: 0, final_loss: 0.0 });
            continue;
        }
        let mut final_loss = 0.0;
        for _ in 0..stage.epochs {
            order.shuffle(&mut rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(config.batch_size) {
                let lr = config.learning_rate(batch_no);
                batch_no += 1;
                grads.clear();
                let mut bias_grad = 0.0;
                for &i in chunk {
                    let r = &enc.rows[i];
                    let p = sigmoid(logit(&model, &enc, r));
                    epoch_loss += log_loss(p, r.label);
                    let g = p - if r.label { 1.0 } else { 0.0 };
                    bias_grad += g;
                    grads.extend(enc.shared[r.group].iter().chain(&r.own).map(|&f| (f, g)));
                }
                let step = lr / chunk.len() as f64;
                model.bias -= step * bias_grad;
                for &(f, g) in &grads {
                    model.weights[f as usize] -= step * g;
                }
            }
            final_loss = epoch_loss / order.len() as f64;
        }
        log::info!("stage `{}`: {} examples, loss {:.4}", stage.name, order.len(), final_loss);
        stages.push(StageMeta { name: stage.name.clone(), epochs: stage.epochs, examples: order.len(), final_loss });
    }
    model.meta = TrainingMeta {
        seed: config.seed,
        lr_low: config.lr_low,
        lr_high: config.lr_high,
        lr_scale: config.lr_scale,
        batch_size: config.batch_size,
        stages,
    };
    model.validate()?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldOutMetrics {
    /// Mean logistic loss per example.
    pub loss: f64,
    /// Share of (positive, negative) sibling pairs ranked correctly, ties
    /// counting one half. Chance is 0.5.
    pub pairwise_accuracy: f64,
    pub pairs: usize,
}

pub fn held_out_metrics(model: &ScorerModel, examples: &[TrainingExample]) -> HeldOutMetrics {
    let enc = encode(examples, model.dim);
    let probs: Vec<f64> = enc.rows.iter().map(|r| sigmoid(logit(model, &enc, r))).collect();
    let loss = if examples.is_empty() {
        0.0
    } else {
        enc.rows.iter().zip(&probs).map(|(r, &p)| log_loss(p, r.label)).sum::<f64>() / examples.len() as f64
    };
    let (mut correct, mut pairs) = (0.0, 0usize);
    let mut start = 0;
    while start < enc.rows.len() {
        let g = enc.rows[start].group;
        let end = start + enc.rows[start..].iter().take_while(|r| r.group == g).count();
        let members = start..end;
        for i in members.clone().filter(|&i| enc.rows[i].label) {
            for j in members.clone().filter(|&j| !enc.rows[j].label) {
                pairs += 1;
                correct += match probs[i].partial_cmp(&probs[j]) {
                    Some(core::cmp::Ordering::Greater) => 1.0,
                    Some(core::cmp::Ordering::Equal) => 0.5,
                    _ => 0.0,
                };
            }
        }
        start = end;
    }
    let pairwise_accuracy = if pairs == 0 { 0.5 } else { correct / pairs as f64 };
    HeldOutMetrics { loss, pairwise_accuracy, pairs }
}

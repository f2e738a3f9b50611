//! Self-supervised training data.
//!
//! A random corpus span becomes a rule (one field constraint per token),
//! optionally widened with an alternation and a quantifier that the corpus
//! shows to be meaningful. The sentences the rule matches become its
//! specification, and the unique leftmost derivation of the rule is the
//! Oracle transition sequence: at every step exactly one sibling can still
//! grow into the target.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{AnnotatedSentence, Field, Span, SpecEntry, SpecMode, Specification, Token};
use crate::hash::Fnv;
use crate::matcher::{self, satisfies};
use crate::pattern::{expansions, Constraint, Pattern, Quantifier, State, Vocabulary};
use crate::scoring::{CostTable, TrainingExample};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    /// Longest source span, in tokens.
    pub max_len: usize,
    pub alt_p: f64,
    pub quant_p: f64,
    /// Entries per specification.
    pub spec_k: usize,
    /// Fresh rules tried per item before giving up.
    pub retries: usize,
    /// Negative siblings kept per derivation step.
    pub max_negatives: usize,
    /// Leave out negatives the search would have pruned anyway.
    pub skip_pruned_negatives: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_len: 7,
            alt_p: 0.3,
            quant_p: 0.3,
            spec_k: 5,
            retries: 20,
            max_negatives: 16,
            skip_pruned_negatives: true,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.max_len == 0 || self.spec_k == 0 || !prob(self.alt_p) || !prob(self.quant_p) {
            return Err(Error::Config(format!(
                "generator needs max_len >= 1, spec_k >= 1 and probabilities in [0, 1]: {self:?}"
            )));
        }
        Ok(())
    }
}

/// One Oracle transition.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivationStep {
    pub current: State,
    pub chosen: usize,
    pub siblings: Vec<State>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedItem {
    pub index: usize,
    pub seed: u64,
    pub rule: Pattern,
    pub spec: Specification,
    pub derivation: Vec<DerivationStep>,
}

impl GeneratedItem {
    /// Minimum number of transitions from the bare hole to the rule.
    pub fn ceiling(&self) -> usize {
        self.derivation.len()
    }
}

/// Seed of item `index` in a dataset seeded with `seed`.
pub fn item_seed(seed: u64, index: usize) -> u64 {
    Fnv::new().write(&seed.to_le_bytes()).write(&(index as u64).to_le_bytes()).finish()
}

const GEN_FIELDS: [Field; 3] = [Field::Word, Field::Lemma, Field::Tag];

fn random_constraint(tok: &Token, rng: &mut impl Rng) -> Constraint {
    let f = *GEN_FIELDS.choose(rng).expect("non-empty");
    Constraint::field(f, tok.field(f))
}

/// A random span turned into a concatenation of field constraints. Returns
/// the rule, the source sentence index and the span.
pub fn gen_base_rule(
    corpus: &[AnnotatedSentence],
    rng: &mut impl Rng,
    max_len: usize,
) -> Result<(Pattern, usize, Span)> {
    let candidates: Vec<usize> = (0..corpus.len()).filter(|&i| !corpus[i].is_empty()).collect();
    let &si = candidates
        .choose(rng)
        .ok_or_else(|| Error::Generation("corpus has no non-empty sentence".into()))?;
    let s = &corpus[si];
    let len = rng.gen_range(1..=max_len.min(s.len()).max(1));
    let start = rng.gen_range(0..=s.len() - len);
    let items = s.tokens()[start..start + len]
        .iter()
        .map(|t| Pattern::Token(random_constraint(t, rng)))
        .collect();
    Ok((Pattern::concat_all(items).expect("len >= 1"), si, Span::new(start, start + len)))
}

fn items_of(rule: &Pattern) -> Vec<Pattern> {
    rule.concat_items().into_iter().cloned().collect()
}

fn rebuild(items: Vec<Pattern>) -> Pattern {
    Pattern::concat_all(items).expect("non-empty rule")
}

fn hit_sentences(rule: &Pattern, corpus: &[AnnotatedSentence]) -> Vec<usize> {
    (0..corpus.len()).filter(|&i| !matcher::scan(rule, corpus[i].tokens()).is_empty()).collect()
}

fn hit_count(rule: &Pattern, corpus: &[AnnotatedSentence]) -> usize {
    corpus.iter().map(|s| matcher::scan(rule, s.tokens()).len()).sum()
}

fn token_constraint(p: &Pattern) -> Option<&Constraint> {
    match p {
        Pattern::Token(c) => Some(c),
        _ => None,
    }
}

/// Widens one single-token item so that it also accepts a token the corpus
/// shows in the same context. Returns the new rule and the sentence that
/// witnesses the new branch, or `None` when the corpus offers nothing.
pub fn add_alternation(
    rule: &Pattern,
    corpus: &[AnnotatedSentence],
    rng: &mut impl Rng,
) -> Option<(Pattern, usize)> {
    let mut items = items_of(rule);
    let eligible: Vec<usize> = (0..items.len()).filter(|&i| token_constraint(&items[i]).is_some()).collect();
    let &pos = eligible.choose(rng)?;
    // Every item ahead of `pos` is a single token, so the probe hit's offset
    // locates the wildcard token.
    if items[..pos].iter().any(|p| token_constraint(p).is_none()) {
        return None;
    }
    let original = token_constraint(&items[pos]).expect("eligible").clone();
    let mut probe = items.clone();
    probe[pos] = Pattern::Token(Constraint::Wildcard);
    let probe = rebuild(probe);
    let mut hits: Vec<(usize, usize)> = Vec::new();
    for (si, s) in corpus.iter().enumerate() {
        for span in matcher::scan(&probe, s.tokens()) {
            let tok = &s.tokens()[span.start + pos];
            if !satisfies(&original, tok) {
                hits.push((si, span.start + pos));
            }
        }
    }
    let &(si, ti) = hits.choose(rng)?;
    let tok = &corpus[si].tokens()[ti];
    let alt = random_constraint(tok, rng);
    items[pos] = if rng.gen_bool(0.5) {
        Pattern::alternation(Pattern::Token(original), Pattern::Token(alt))
    } else {
        Pattern::Token(Constraint::or(original, alt))
    };
    Some((rebuild(items), si))
}

/// Wraps one item in a quantifier when the corpus shows the quantifier
/// matters. Returns the new rule and a sentence witnessing the change.
pub fn add_quantifier(
    rule: &Pattern,
    corpus: &[AnnotatedSentence],
    rng: &mut impl Rng,
) -> Option<(Pattern, usize)> {
    let mut items = items_of(rule);
    let pos = rng.gen_range(0..items.len());
    let q = *Quantifier::ALL.choose(rng).expect("non-empty");
    if matches!(items[pos], Pattern::Quantified(..)) {
        return None;
    }
    let before = hit_count(rule, corpus);
    let mut wrapped = items.clone();
    wrapped[pos] = Pattern::quantified(items[pos].clone(), q);
    let candidate = rebuild(wrapped);
    let after = hit_count(&candidate, corpus);
    let witness = match q {
        Quantifier::OneOrMore => {
            if after < before {
                return None;
            }
            let dup = items[pos].clone();
            items.insert(pos, dup);
            let doubled = rebuild(items);
            hit_sentences(&doubled, corpus).into_iter().choose(rng)?
        }
        _ => {
            if after <= before {
                return None;
            }
            let differs: Vec<usize> = hit_sentences(&candidate, corpus)
                .into_iter()
                .filter(|&i| matcher::scan(&candidate, corpus[i].tokens()) != matcher::scan(rule, corpus[i].tokens()))
                .collect();
            *differs.choose(rng)?
        }
    };
    Some((candidate, witness))
}

/// Up to `k` sentences the rule matches, `preferred` ones first, each
/// highlighted exactly where the rule matches.
pub fn build_spec(
    rule: &Pattern,
    corpus: &[AnnotatedSentence],
    k: usize,
    preferred: &[usize],
    rng: &mut impl Rng,
) -> Result<Specification> {
    let hits = hit_sentences(rule, corpus);
    let mut chosen: Vec<usize> = Vec::new();
    for &p in preferred {
        if chosen.len() < k && !chosen.contains(&p) && hits.binary_search(&p).is_ok() {
            chosen.push(p);
        }
    }
    let rest: Vec<usize> = hits.into_iter().filter(|i| !chosen.contains(i)).collect();
    let extra = k - chosen.len();
    chosen.extend(rest.choose_multiple(rng, extra.min(rest.len())).copied());
    if chosen.is_empty() {
        return Err(Error::Generation(format!("rule `{rule}` matches nothing in the corpus")));
    }
    let entries = chosen
        .into_iter()
        .map(|i| {
            let s = &corpus[i];
            SpecEntry::new(s.clone(), matcher::scan(rule, s.tokens()))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = Specification::new(entries, SpecMode::Surface)?;
    assert!(matcher::check_spec(rule, &spec)?, "selections are the rule's own matches");
    Ok(spec)
}

/// The leftmost derivation of `rule`: at every step the single sibling
/// that still generalizes the target. The rule is taken in canonical
/// (right-nested) form.
pub fn oracle_derivation(rule: &Pattern, spec: &Specification, costs: &CostTable) -> Result<Vec<DerivationStep>> {
    if !rule.is_complete() {
        return Err(Error::IncompletePattern);
    }
    let target = rule.canonicalize();
    let vocab = Vocabulary::from_spec(spec);
    let mut state = State::root(costs);
    let mut steps = Vec::new();
    while !state.is_complete() {
        let siblings = expansions(&state, &vocab, costs)?;
        let chosen = siblings.iter().position(|s| s.pattern.generalizes(&target)).ok_or(Error::NotDerivable)?;
        let next = siblings[chosen].clone();
        steps.push(DerivationStep { current: state, chosen, siblings });
        state = next;
    }
    debug_assert_eq!(state.pattern, target);
    Ok(steps)
}

/// Re-applies a derivation from the bare hole and returns the rule it
/// reaches, or `None` if some step is not one of its current state's
/// expansions.
pub fn replay(derivation: &[DerivationStep], spec: &Specification, costs: &CostTable) -> Option<Pattern> {
    let vocab = Vocabulary::from_spec(spec);
    let mut state = State::root(costs);
    for step in derivation {
        if step.current.pattern != state.pattern {
            return None;
        }
        let siblings = expansions(&state, &vocab, costs).ok()?;
        if siblings != step.siblings {
            return None;
        }
        state = siblings.get(step.chosen)?.clone();
    }
    state.is_complete().then_some(state.pattern)
}

/// Generates item `index` of the dataset seeded with `seed`.
pub fn gen_item(corpus: &[AnnotatedSentence], index: usize, seed: u64, cfg: &GenConfig) -> Result<GeneratedItem> {
    cfg.validate()?;
    let costs = CostTable::default();
    let item_seed = item_seed(seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(item_seed);
    for _ in 0..=cfg.retries {
        let (mut rule, source, _) = gen_base_rule(corpus, &mut rng, cfg.max_len)?;
        let mut preferred = vec![source];
        if rng.gen_bool(cfg.alt_p) {
            if let Some((r, w)) = add_alternation(&rule, corpus, &mut rng) {
                rule = r;
                preferred.push(w);
            }
        }
        if rng.gen_bool(cfg.quant_p) {
            if let Some((r, w)) = add_quantifier(&rule, corpus, &mut rng) {
                rule = r;
                preferred.push(w);
            }
        }
        let Ok(spec) = build_spec(&rule, corpus, cfg.spec_k, &preferred, &mut rng) else {
            continue;
        };
        let derivation = match oracle_derivation(&rule, &spec, &costs) {
            Ok(d) => d,
            Err(Error::NotDerivable) => continue,
            Err(e) => return Err(e),
        };
        return Ok(GeneratedItem { index, seed: item_seed, rule, spec, derivation });
    }
    Err(Error::Generation(format!("item {index}: no usable rule after {} attempts", cfg.retries + 1)))
}

/// `n` items, each generated from its own derived seed.
pub fn gen_dataset(corpus: &[AnnotatedSentence], n: usize, seed: u64, cfg: &GenConfig) -> Result<Vec<GeneratedItem>> {
    (0..n).map(|i| gen_item(corpus, i, seed, cfg)).collect()
}

/// Flattens an item's derivation into labelled transitions: per step the
/// Oracle sibling and up to `max_negatives` sampled other siblings, each
/// paired with every specification entry.
pub fn training_examples(item: &GeneratedItem, cfg: &GenConfig) -> Vec<TrainingExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(item.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    for (j, step) in item.derivation.iter().enumerate() {
        let mut negatives: Vec<usize> = (0..step.siblings.len())
            .filter(|&i| i != step.chosen)
            .filter(|&i| !cfg.skip_pruned_negatives || !matcher::prune_check(&step.siblings[i].pattern, &item.spec))
            .collect();
        if negatives.len() > cfg.max_negatives {
            negatives = negatives.choose_multiple(&mut rng, cfg.max_negatives).copied().collect();
            negatives.sort_unstable();
        }
        let mut keep = negatives;
        keep.push(step.chosen);
        keep.sort_unstable();
        for entry in item.spec.entries() {
            for &i in &keep {
                out.push(TrainingExample {
                    entry: entry.clone(),
                    current: step.current.clone(),
                    candidate: step.siblings[i].clone(),
                    label: i == step.chosen,
                    item: item.index,
                    step: j,
                });
            }
        }
    }
    out
}

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruleforge_core::corpus::{query_corpus, sentence};
use ruleforge_core::evalkit::{fewshot_predict, intrinsic_row, Episode, EpisodeSentence, FewShotConfig};
use ruleforge_core::matcher::{check_spec, find_matches, least_restrictive_completion, matches_exact, prune_check};
use ruleforge_core::pattern::{expansions, parse, print, Vocabulary};
use ruleforge_core::scoring::{
    augmentation_reward, score_transition_multi, AugmentedScorer, CostTable, StaticScorer,
};
use ruleforge_core::selfsup::{gen_item, replay, GenConfig, GeneratedItem};
use ruleforge_core::{
    AnnotatedSentence, Constraint, Field, Pattern, Quantifier, Scorer, SearchConfig, Span, SpecEntry, SpecMode,
    State,
};

const WORDS: [&str; 4] = ["a", "b", "c", "d"];
const TAGS: [&str; 2] = ["x", "y"];

/// A random sentence whose arcs form a tree over shuffled positions.
fn tree_sentence(rng: &mut ChaCha8Rng, id: &str, len: usize) -> AnnotatedSentence {
    let toks: Vec<String> = (0..len)
        .map(|_| {
            let w = WORDS.choose(rng).unwrap();
            let t = TAGS.choose(rng).unwrap();
            let e = if rng.gen_bool(0.3) { "p" } else { "o" };
            format!("{w}/{w}/{t}/{e}")
        })
        .collect();
    let mut order: Vec<usize> = (0..len).collect();
    order.shuffle(rng);
    let arcs: Vec<(usize, usize)> = (1..len).map(|i| (order[rng.gen_range(0..i)], order[i])).collect();
    let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
    sentence(id, &refs, &arcs)
}

fn random_corpus(seed: u64, n: usize) -> Vec<AnnotatedSentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let len = rng.gen_range(3..10);
            tree_sentence(&mut rng, &format!("s{i}"), len)
        })
        .collect()
}

fn item(seed: u64) -> Option<GeneratedItem> {
    let corpus = random_corpus(seed, 30);
    let cfg = GenConfig { spec_k: 3, ..GenConfig::default() };
    gen_item(&corpus, 0, seed, &cfg).ok()
}

fn arb_constraint() -> impl Strategy<Value = Constraint> {
    let leaf = prop_oneof![
        Just(Constraint::Wildcard),
        prop::sample::select(WORDS.to_vec()).prop_map(|w| Constraint::field(Field::Word, w)),
        prop::sample::select(TAGS.to_vec()).prop_map(|t| Constraint::field(Field::Tag, t)),
    ];
    leaf.prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Constraint::not),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Constraint::and(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| Constraint::or(l, r)),
        ]
    })
}

fn arb_pattern() -> impl Strategy<Value = Pattern> {
    arb_constraint().prop_map(Pattern::Token).prop_recursive(3, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Pattern::concat(l, r)),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| Pattern::alternation(l, r)),
            (inner, prop::sample::select(vec![Quantifier::ZeroOrOne, Quantifier::ZeroOrMore, Quantifier::OneOrMore]))
                .prop_map(|(p, q)| Pattern::quantified(p, q)),
        ]
    })
}

/// Walks random expansions from the bare hole, up to `steps` transitions.
fn random_walk(seed: u64, steps: usize) -> (SpecEntry, Vec<State>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = tree_sentence(&mut rng, "w", 6);
    let start = rng.gen_range(0..5);
    let entry = SpecEntry::new(s, vec![Span::new(start, start + 2)]).unwrap();
    let costs = CostTable::default();
    let vocab = Vocabulary::from_entries(std::slice::from_ref(&entry));
    let mut walk = vec![State::root(&costs)];
    for _ in 0..steps {
        if walk.last().unwrap().is_complete() {
            break;
        }
        let next = expansions(walk.last().unwrap(), &vocab, &costs).unwrap();
        match next.choose(&mut rng) {
            Some(s) => walk.push(s.clone()),
            None => break,
        }
    }
    (entry, walk)
}

fn node_kinds(p: &Pattern, out: &mut Vec<&'static str>) {
    fn constraint(c: &Constraint, out: &mut Vec<&'static str>) {
        match c {
            Constraint::Hole => out.push("hole"),
            Constraint::Wildcard => out.push("wildcard"),
            Constraint::FieldIs(..) => out.push("field"),
            Constraint::Not(x) => {
                out.push("not");
                constraint(x, out);
            }
            Constraint::And(l, r) | Constraint::Or(l, r) => {
                out.push(if matches!(c, Constraint::And(..)) { "and" } else { "or" });
                constraint(l, out);
                constraint(r, out);
            }
        }
    }
    match p {
        Pattern::Hole => out.push("hole"),
        Pattern::Token(c) => {
            out.push("token");
            constraint(c, out);
        }
        Pattern::Concat(l, r) => {
            out.push("concat");
            node_kinds(l, out);
            node_kinds(r, out);
        }
        Pattern::Alternation(l, r) => {
            out.push("alternation");
            node_kinds(l, out);
            node_kinds(r, out);
        }
        Pattern::Quantified(x, q) => {
            out.push(match q {
                Quantifier::ZeroOrOne => "?",
                Quantifier::ZeroOrMore => "*",
                Quantifier::OneOrMore => "+",
            });
            node_kinds(x, out);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dependency_paths_are_symmetric_and_ordered(seed in any::<u64>(), len in 2usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = tree_sentence(&mut rng, "t", len);
        let a = rng.gen_range(0..len);
        let b = (a + rng.gen_range(1..len)) % len;
        let mut there = s.shortest_dep_path(a, b).unwrap();
        let mut back = s.shortest_dep_path(b, a).unwrap();
        let lin = s.linearize_path(&there).unwrap();
        there.sort_unstable();
        back.sort_unstable();
        prop_assert_eq!(&there, &back);
        let expected: Vec<_> = there.iter().map(|&i| s.tokens()[i].clone()).collect();
        prop_assert_eq!(lin.tokens(), &expected[..]);
    }

    #[test]
    fn query_corpus_is_truncated_union(seed in any::<u64>(), pattern in arb_pattern(), limit in 0usize..12) {
        let corpus = random_corpus(seed, 6);
        let hits = query_corpus(&corpus, &pattern, limit).unwrap();
        let all: Vec<(String, Span)> = corpus
            .iter()
            .flat_map(|s| find_matches(&pattern, s).unwrap().spans().iter().map(|&sp| (s.id().to_string(), sp)).collect::<Vec<_>>())
            .collect();
        let got: Vec<(String, Span)> = hits.iter().map(|(s, sp)| (s.id().to_string(), *sp)).collect();
        prop_assert_eq!(&got[..], &all[..limit.min(all.len())]);
    }

    #[test]
    fn expansion_walks_keep_hole_arithmetic(seed in any::<u64>()) {
        let (entry, walk) = random_walk(seed, 12);
        let costs = CostTable::default();
        let vocab = Vocabulary::from_entries(std::slice::from_ref(&entry));
        for pair in walk.windows(2) {
            let (parent, child) = (&pair[0], &pair[1]);
            prop_assert_eq!(child.depth, parent.depth + 1);
            let dn = child.pattern.node_count() as i64 - parent.pattern.node_count() as i64;
            let dh = child.pattern.hole_count() as i64 - parent.pattern.hole_count() as i64;
            prop_assert_eq!(dh, dn - 1, "{} -> {}", print(&parent.pattern), print(&child.pattern));
            prop_assert_eq!(expansions(parent, &vocab, &costs).unwrap(), expansions(parent, &vocab, &costs).unwrap());
        }
        for state in &walk {
            prop_assert_eq!(parse(&print(&state.pattern)).unwrap(), state.pattern.clone());
        }
    }

    #[test]
    fn static_ranking_survives_scaling(seed in any::<u64>(), c in 0.1f64..10.0) {
        let (entry, walk) = random_walk(seed, 6);
        let costs = CostTable::default();
        let vocab = Vocabulary::from_entries(std::slice::from_ref(&entry));
        let Some(parent) = walk.iter().rev().find(|s| !s.is_complete()) else { return Ok(()) };
        let kids = expansions(parent, &vocab, &costs).unwrap();
        let best = |scorer: &StaticScorer| {
            let scores: Vec<f64> = kids.iter().map(|k| scorer.score_transition(parent, k, &entry).unwrap()).collect();
            let top = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            scores.iter().map(|&s| (s - top).abs() <= 1e-9 * top.abs().max(1.0)).collect::<Vec<_>>()
        };
        prop_assert_eq!(best(&StaticScorer::new(costs.clone())), best(&StaticScorer::new(costs.scaled(c))));
    }

    #[test]
    fn static_scores_ignore_the_entry(seed in any::<u64>()) {
        let (_, walk) = random_walk(seed, 8);
        let scorer = StaticScorer::new(CostTable::default());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let state = walk.last().unwrap();
        let scores: Vec<f64> = (0..10)
            .map(|i| {
                let len = rng.gen_range(2..8);
                let s = tree_sentence(&mut rng, &format!("e{i}"), len);
                let entry = SpecEntry::new(s, vec![Span::new(0, 1)]).unwrap();
                scorer.score_transition(&walk[0], state, &entry).unwrap()
            })
            .collect();
        prop_assert!(scores.windows(2).all(|w| w[0] == w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn generated_items_are_sound(seed in any::<u64>()) {
        let Some(item) = item(seed) else { return Ok(()) };
        let costs = CostTable::default();
        prop_assert!(check_spec(&item.rule, &item.spec).unwrap());
        prop_assert_eq!(replay(&item.derivation, &item.spec, &costs), Some(item.rule.clone()));
        for step in &item.derivation {
            prop_assert!(!prune_check(&step.current.pattern, &item.spec), "pruned {}", print(&step.current.pattern));
        }
    }

    #[test]
    fn completions_cover_every_derivable_match(seed in any::<u64>()) {
        let Some(item) = item(seed) else { return Ok(()) };
        for step in &item.derivation {
            let loose = least_restrictive_completion(&step.current.pattern);
            for entry in item.spec.entries() {
                let s = entry.sentence();
                for start in 0..s.len() {
                    for end in start + 1..=s.len() {
                        let sp = Span::new(start, end);
                        if matches_exact(&item.rule, s, sp).unwrap() {
                            prop_assert!(matches_exact(&loose, s, sp).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn satisfying_rules_earn_the_full_reward(seed in any::<u64>()) {
        let Some(item) = item(seed) else { return Ok(()) };
        for entry in item.spec.entries() {
            prop_assert_eq!(augmentation_reward(&item.rule, entry), entry.highlighted_count() as i64);
        }
    }

    #[test]
    fn multi_entry_score_lies_between_extremes(seed in any::<u64>()) {
        let Some(item) = item(seed) else { return Ok(()) };
        let scorer = AugmentedScorer::default();
        for step in &item.derivation {
            let cand = &step.siblings[step.chosen];
            let each: Vec<f64> = item.spec.entries().iter().map(|e| scorer.score_transition(&step.current, cand, e).unwrap()).collect();
            let mean = score_transition_multi(&scorer, &step.current, cand, &item.spec).unwrap();
            let lo = each.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = each.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-9 <= mean && mean <= hi + 1e-9);
        }
    }

    #[test]
    fn search_results_hold_and_budgets_are_monotone(seed in any::<u64>(), budget in 1usize..300) {
        let Some(item) = item(seed) else { return Ok(()) };
        let scorer = AugmentedScorer::default();
        let small = SearchConfig { max_states: budget, ..SearchConfig::default() };
        let large = SearchConfig { max_states: budget + 200, ..SearchConfig::default() };
        let a = ruleforge_core::synthesize(&item.spec, &scorer, &small).unwrap();
        prop_assert!(a.states_explored <= budget);
        if let Some(rule) = &a.rule {
            prop_assert!(check_spec(rule, &item.spec).unwrap());
            let b = ruleforge_core::synthesize(&item.spec, &scorer, &large).unwrap();
            prop_assert_eq!(&b.rule, &a.rule);
            prop_assert_eq!(b.states_explored, a.states_explored);
        }
        let row = intrinsic_row(&item, &scorer, &small).unwrap();
        if let Some(fc) = row.found_ceiling {
            prop_assert!(row.steps >= fc);
        }
    }
}

#[test]
fn generator_covers_every_emitted_node_kind() {
    let corpus = random_corpus(99, 60);
    let cfg = GenConfig { alt_p: 0.5, quant_p: 0.5, spec_k: 2, ..GenConfig::default() };
    let mut kinds = Vec::new();
    for i in 0..300 {
        if let Ok(item) = gen_item(&corpus, i, 1234 + i as u64, &cfg) {
            node_kinds(&item.rule, &mut kinds);
        }
    }
    for k in ["token", "field", "concat", "alternation", "?", "*", "+"] {
        assert!(kinds.contains(&k), "never generated {k}");
    }
    for k in ["not", "and", "hole"] {
        assert!(!kinds.contains(&k), "generated {k}");
    }
}

#[test]
fn fewshot_prediction_is_deterministic() {
    let es = |words: &[&str], gold: &str| {
        let toks: Vec<String> = words
            .iter()
            .map(|w| match *w {
                "PER" => "per/per/nnp/person".to_string(),
                "LOC" => "loc/loc/nnp/location".to_string(),
                w => format!("{w}/{w}/vbd/o"),
            })
            .collect();
        let refs: Vec<&str> = toks.iter().map(String::as_str).collect();
        let arcs: Vec<(usize, usize)> = (0..words.len()).filter(|&i| i != 1).map(|i| (1, i)).collect();
        EpisodeSentence {
            sentence: sentence(gold, &refs, &arcs),
            subj: Span::new(0, 1),
            subj_type: "person".into(),
            obj: Span::new(2, 3),
            obj_type: "location".into(),
            gold: gold.into(),
        }
    };
    let episode = Episode {
        way: 2,
        shot: 1,
        support: vec![
            ("born".into(), vec![es(&["PER", "born", "LOC"], "born")]),
            ("visited".into(), vec![es(&["PER", "visited", "LOC"], "visited")]),
        ],
        queries: vec![es(&["PER", "visited", "LOC", "today"], "visited"), es(&["PER", "left", "LOC"], "no_relation")],
    };
    for mode in [SpecMode::Surface, SpecMode::SimplifiedSyntax] {
        let cfg = FewShotConfig { negative_supports: true, ..FewShotConfig::default() };
        let a = fewshot_predict(&episode, mode, &AugmentedScorer::default(), &cfg).unwrap();
        let b = fewshot_predict(&episode, mode, &AugmentedScorer::default(), &cfg).unwrap();
        assert_eq!(a, b);
    }
}

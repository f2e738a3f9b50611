//! `ruleforge` command line. Exit codes: 0 success, 1 domain error, 2 usage.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ruleforge_core::evalkit::{
    baseline_predict, fewshot_predict, intrinsic_row, micro_f1, summarize, FewShotConfig, IntrinsicReport,
    OracleScorer, RandomScorer, Stats, REPORT_NOTE,
};
use ruleforge_core::matcher::find_matches;
use ruleforge_core::pattern::{parse, print};
use ruleforge_core::scoring::{held_out_metrics, train_contextual, ContextualScorer, Scorer, TrainConfig};
use ruleforge_core::selfsup::{gen_item, training_examples, GeneratedItem};
use serde::Serialize;
use serde_json::json;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formats::{self, Corpus};
use crate::synth::{self, build_scorer, ScorerKind, TraceLine};

#[derive(Debug, Parser)]
#[command(name = "ruleforge", version, about = "Synthesize token-pattern rules from highlighted examples")]
pub struct Cli {
    /// JSON config file (costs, generator, budgets, service limits).
    #[arg(long, global = true, env = "RULEFORGE_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    /// static, augmented, contextual or remote.
    #[arg(long, default_value = "augmented")]
    pub scorer: String,
    /// Trained model for the contextual scorer.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Remote scorer URL.
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Config file whose `costs` override the defaults.
    #[arg(long)]
    pub costs: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a rule for a specification file.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        /// Corpus for `{"ref": id}` sentences.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[arg(long)]
        max_states: Option<usize>,
        #[arg(long)]
        no_pruning: bool,
        /// Write popped states as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the spans a rule matches.
    Match {
        #[arg(long)]
        rule: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        sentence: Option<String>,
    },
    /// Generate rule/specification items and their training transitions.
    GenData {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Training examples (JSON lines with a header).
        #[arg(long)]
        out: PathBuf,
        /// Also write the items themselves (for eval-intrinsic).
        #[arg(long)]
        items: Option<PathBuf>,
        #[arg(long)]
        alt_p: Option<f64>,
        #[arg(long)]
        quant_p: Option<f64>,
        #[arg(long)]
        spec_k: Option<usize>,
        #[arg(long)]
        max_negatives: Option<usize>,
    },
    /// Train the contextual scorer.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1 << 18)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        lr_low: Option<f64>,
        #[arg(long)]
        lr_high: Option<f64>,
        #[arg(long)]
        lr_scale: Option<f64>,
        /// Held-out training file to report loss and pairwise accuracy on.
        #[arg(long)]
        held_out: Option<PathBuf>,
    },
    /// Search efficiency over generated items.
    EvalIntrinsic {
        #[arg(long)]
        items: PathBuf,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long)]
        no_pruning: bool,
        /// Seed of the random scorer.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: PathBuf,
    },
    /// Few-shot relation extraction over episodes.
    EvalFewshot {
        #[arg(long)]
        episodes: PathBuf,
        /// surface or path.
        #[arg(long, default_value = "surface")]
        mode: String,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Use the other relations' supports as counter-examples.
        #[arg(long)]
        negative_supports: bool,
        #[arg(long)]
        report: PathBuf,
        /// Also run the entity-type baseline.
        #[arg(long)]
        baseline: bool,
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn load_config(cli_config: Option<&Path>, costs: Option<&Path>) -> Result<Config> {
    let mut config = Config::load(cli_config)?;
    if let Some(path) = costs {
        config.merge_json(&formats::read_to_string(path)?)?;
        config.apply_env(std::env::vars())?;
        config.validate()?;
    }
    Ok(config)
}

fn load_contextual(path: Option<&Path>) -> Result<Option<Arc<ContextualScorer>>> {
    path.map(|p| Ok(Arc::new(ContextualScorer::new(formats::load_model(p)?)?))).transpose()
}

fn scorer_from(args: &ScorerArgs, config: &mut Config) -> Result<synth::SharedScorer> {
    if let Some(url) = &args.endpoint {
        config.remote_endpoint = Some(url.clone());
    }
    let kind: ScorerKind = args.scorer.parse()?;
    build_scorer(kind, config, load_contextual(args.model.as_deref())?.as_ref())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    formats::write_string(path, &text)
}

pub fn run(cli: Cli) -> Result<()> {
    let config_path = cli.config.as_deref();
    match cli.command {
        Command::Synth { spec, corpus, scorer, max_states, no_pruning, trace, out } => {
            let mut config = load_config(config_path, scorer.costs.as_deref())?;
            let corpus = corpus.as_deref().map(formats::load_corpus).transpose()?;
            let spec = formats::load_spec(&spec, corpus.as_ref())?;
            let scorer = scorer_from(&scorer, &mut config)?;
            let mut search = config.search.clone();
            if let Some(n) = max_states {
                search.max_states = n;
            }
            search.pruning &= !no_pruning;
            let mut lines = Vec::new();
            let (_, report) = synth::run(&spec, scorer.as_ref(), &search, |l| {
                if trace.is_some() {
                    lines.push(l)
                }
            })?;
            if let Some(path) = trace {
                write_trace(&path, &lines)?;
            }
            if let Some(path) = out {
                write_json(&path, &report)?;
            }
            match &report.rule {
                Some(rule) => println!("{rule}"),
                None => println!("no rule found after {} states", report.states_explored),
            }
            Ok(())
        }
        Command::Match { rule, corpus, sentence } => {
            let rule = parse(&rule)?;
            let corpus = formats::load_corpus(&corpus)?;
            let selected: Vec<_> = match &sentence {
                Some(id) => vec![corpus.get(id).ok_or_else(|| Error::Invalid(format!("no sentence `{id}` in corpus")))?],
                None => corpus.sentences.iter().collect(),
            };
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            for s in selected {
                let spans = find_matches(&rule, s)?;
                if spans.is_empty() && sentence.is_none() {
                    continue;
                }
                let shown: Vec<String> = spans
                    .spans()
                    .iter()
                    .map(|sp| {
                        let words: Vec<&str> = s.tokens()[sp.start..sp.end].iter().map(|t| t.word.as_str()).collect();
                        format!("{sp} {}", words.join(" "))
                    })
                    .collect();
                let _ = writeln!(out, "{}\t{}", s.id(), shown.join("\t"));
            }
            Ok(())
        }
        Command::GenData { corpus, n, seed, out, items, alt_p, quant_p, spec_k, max_negatives } => {
            let mut config = load_config(config_path, None)?;
            let g = &mut config.generator;
            if let Some(v) = alt_p {
                g.alt_p = v;
            }
            if let Some(v) = quant_p {
                g.quant_p = v;
            }
            if let Some(v) = spec_k {
                g.spec_k = v;
            }
            if let Some(v) = max_negatives {
                g.max_negatives = v;
            }
            config.validate()?;
            let corpus = formats::load_corpus(&corpus)?;
            let generated = generate(&corpus, n, seed, &config)?;
            let examples: Vec<_> = generated.par_iter().flat_map_iter(|it| training_examples(it, &config.generator)).collect();
            formats::write_training(&out, generated.len(), &examples)?;
            if let Some(path) = items {
                formats::write_items(&path, &generated)?;
            }
            eprintln!("{} items, {} training examples", generated.len(), examples.len());
            Ok(())
        }
        Command::Train { data, out, dim, seed, lr_low, lr_high, lr_scale, held_out } => {
            let config = load_config(config_path, None)?;
            let examples = formats::load_training(&data, &config.costs)?;
            let mut tc = TrainConfig { dim, seed, ..TrainConfig::default() };
            if let Some(v) = lr_low {
                tc.lr_low = v;
            }
            if let Some(v) = lr_high {
                tc.lr_high = v;
            }
            if let Some(v) = lr_scale {
                tc.lr_scale = v;
            }
            let model = train_contextual(&examples, &tc)?;
            formats::save_model(&out, &model)?;
            for s in &model.meta.stages {
                eprintln!("stage {}: {} examples x {} epochs, loss {:.4}", s.name, s.examples, s.epochs, s.final_loss);
            }
            if let Some(path) = held_out {
                let held = formats::load_training(&path, &config.costs)?;
                let m = held_out_metrics(&model, &held);
                println!("held-out loss {:.4}, pairwise accuracy {:.4} over {} pairs", m.loss, m.pairwise_accuracy, m.pairs);
            }
            Ok(())
        }
        Command::EvalIntrinsic { items, scorer, budget, no_pruning, seed, report } => {
            let mut config = load_config(config_path, scorer.costs.as_deref())?;
            let items = formats::load_items(&items, &config.costs)?;
            let mut search = config.search.clone();
            search.max_states = budget;
            search.pruning &= !no_pruning;
            let result = match scorer.scorer.as_str() {
                "oracle" => intrinsic_parallel(&items, &search, |item| Box::new(OracleScorer::new(&item.rule)))?,
                "random" => intrinsic_parallel(&items, &search, |_| Box::new(RandomScorer { seed }))?,
                _ => {
                    let shared = scorer_from(&scorer, &mut config)?;
                    intrinsic_parallel(&items, &search, |_| Box::new(shared.clone()))?
                }
            };
            write_json(&report, &intrinsic_json(&result, &scorer.scorer, budget))?;
            print!("{}", result.table(&scorer.scorer));
            Ok(())
        }
        Command::EvalFewshot {
            episodes,
            mode,
            scorer,
            budget,
            negative_supports,
            report,
            baseline,
            background,
            seed,
        } => {
            let mut config = load_config(config_path, scorer.costs.as_deref())?;
            let mode = formats::parse_mode(&mode)?;
            let episodes = formats::load_episodes(&episodes)?;
            let background = background.as_deref().map(formats::load_background).transpose()?.unwrap_or_default();
            let shared = scorer_from(&scorer, &mut config)?;
            let mut fs = FewShotConfig { search: config.search.clone(), negative_supports: negative_supports || config.negative_supports };
            fs.search.max_states = budget;
            let outcomes = episodes
                .par_iter()
                .map(|ep| fewshot_predict(ep, mode, shared.as_ref(), &fs))
                .collect::<ruleforge_core::Result<Vec<_>>>()?;
            let golds: Vec<&str> = episodes.iter().flat_map(|e| e.queries.iter().map(|q| q.gold.as_str())).collect();
            let preds: Vec<&str> = outcomes.iter().flat_map(|o| o.predictions.iter().map(String::as_str)).collect();
            let f1 = micro_f1(&preds, &golds);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let baseline_preds: Option<Vec<Vec<String>>> =
                baseline.then(|| episodes.iter().map(|ep| baseline_predict(ep, &background, &mut rng)).collect());
            let baseline_f1 = baseline_preds.as_ref().map(|b| {
                let flat: Vec<&str> = b.iter().flatten().map(String::as_str).collect();
                micro_f1(&flat, &golds)
            });
            let per_episode: Vec<_> = episodes
                .iter()
                .zip(&outcomes)
                .enumerate()
                .map(|(i, (ep, out))| {
                    json!({
                        "rules": out.rules.iter().map(|r| json!({
                            "label": r.label,
                            "rule": r.rule.as_ref().map(print),
                            "statesExplored": r.states_explored,
                        })).collect::<Vec<_>>(),
                        "predictions": out.predictions,
                        "golds": ep.queries.iter().map(|q| q.gold.as_str()).collect::<Vec<_>>(),
                        "baseline": baseline_preds.as_ref().map(|b| &b[i]),
                    })
                })
                .collect();
            let doc = json!({
                "mode": formats::mode_name(mode),
                "scorer": scorer.scorer,
                "budget": budget,
                "negativeSupports": fs.negative_supports,
                "episodes": episodes.len(),
                "queries": golds.len(),
                "microF1": f1,
                "baseline": baseline_f1.map(|f| json!({"seed": seed, "microF1": f, "background": background.len()})),
                "perEpisode": per_episode,
            });
            write_json(&report, &doc)?;
            println!("micro-F1 {f1:.4}");
            if let Some(b) = baseline_f1 {
                println!("baseline micro-F1 {b:.4}");
            }
            Ok(())
        }
        Command::Serve { port, host, corpus, model } => {
            let config = load_config(config_path, None)?;
            let corpus = formats::load_corpus(&corpus)?;
            let model = load_contextual(model.as_deref())?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Invalid(format!("runtime: {e}")))?;
            runtime.block_on(crate::service::serve(&host, port, crate::service::AppState::new(corpus, model, config)))
        }
    }
}

/// Items in index order; indices whose generation gave up are skipped.
pub fn generate(corpus: &Corpus, n: usize, seed: u64, config: &Config) -> Result<Vec<GeneratedItem>> {
    let results: Vec<_> = (0..n).into_par_iter().map(|i| gen_item(&corpus.sentences, i, seed, &config.generator)).collect();
    let mut items = Vec::with_capacity(n);
    for r in results {
        match r {
            Ok(item) => items.push(item),
            Err(ruleforge_core::Error::Generation(msg)) => log::warn!("skipping: {msg}"),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(items)
}

pub fn intrinsic_parallel<'a>(
    items: &'a [GeneratedItem],
    search: &ruleforge_core::search::SearchConfig,
    scorer_for: impl Fn(&'a GeneratedItem) -> Box<dyn Scorer + Send + Sync + 'a> + Sync,
) -> Result<IntrinsicReport> {
    let rows = items
        .par_iter()
        .map(|item| intrinsic_row(item, scorer_for(item).as_ref(), search))
        .collect::<ruleforge_core::Result<Vec<_>>>()?;
    Ok(summarize(rows))
}

fn stats_json(s: Option<Stats>) -> serde_json::Value {
    s.map_or(serde_json::Value::Null, |s| json!({"avg": s.avg, "median": s.median, "max": s.max, "min": s.min}))
}

pub fn intrinsic_json(r: &IntrinsicReport, scorer: &str, budget: usize) -> serde_json::Value {
    json!({
        "scorer": scorer,
        "budget": budget,
        "note": REPORT_NOTE,
        "total": r.total,
        "found": r.found,
        "steps": stats_json(r.steps),
        "ceiling": stats_json(r.ceiling),
        "belowCeiling": r.below_ceiling,
        "rows": r.rows.iter().map(|row| json!({
            "index": row.index,
            "found": row.found,
            "steps": row.steps,
            "ceiling": row.ceiling,
            "foundCeiling": row.found_ceiling,
            "rule": row.rule,
        })).collect::<Vec<_>>(),
    })
}

fn write_trace(path: &Path, lines: &[TraceLine]) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&serde_json::to_string(l).expect("trace serializes"));
        text.push('\n');
    }
    formats::write_string(path, &text)
}

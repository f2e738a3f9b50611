//! On-disk and on-the-wire formats: corpus JSONL, specification files,
//! scorer models, generated items, training examples and episodes.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use base64::Engine;
use ruleforge_core::corpus::{AnnotatedSentence, Dependency, Span, SpecEntry, SpecMode, Specification, Token};
use ruleforge_core::evalkit::{Episode, EpisodeSentence};
use ruleforge_core::pattern::{parse, print, State};
use ruleforge_core::scoring::{CostTable, ScorerModel, StageMeta, TrainingExample, TrainingMeta};
use ruleforge_core::selfsup::{oracle_derivation, GeneratedItem};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const TRAINING_FORMAT: &str = "ruleforge-training";
pub const TRAINING_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenJson {
    pub word: String,
    pub lemma: String,
    pub tag: String,
    pub entity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceJson {
    pub id: String,
    pub tokens: Vec<TokenJson>,
    #[serde(default)]
    pub deps: Vec<(usize, usize, String)>,
}

impl SentenceJson {
    pub fn from_sentence(s: &AnnotatedSentence) -> SentenceJson {
        SentenceJson {
            id: s.id().to_string(),
            tokens: s
                .tokens()
                .iter()
                .map(|t| TokenJson {
                    word: t.word.clone(),
                    lemma: t.lemma.clone(),
                    tag: t.tag.clone(),
                    entity: t.entity.clone(),
                })
                .collect(),
            deps: s.deps().iter().map(|d| (d.head, d.dependent, d.label.clone())).collect(),
        }
    }

    pub fn to_sentence(&self) -> Result<AnnotatedSentence> {
        let tokens = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Token::new(&t.word, &t.lemma, &t.tag, &t.entity, i))
            .collect::<ruleforge_core::Result<Vec<_>>>()?;
        let deps = self
            .deps
            .iter()
            .map(|(head, dependent, label)| Dependency { head: *head, dependent: *dependent, label: label.clone() })
            .collect();
        Ok(AnnotatedSentence::new(self.id.clone(), tokens, deps)?)
    }
}

/// Loaded corpus with an id lookup.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub sentences: Vec<AnnotatedSentence>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(sentences: Vec<AnnotatedSentence>) -> Result<Corpus> {
        let mut by_id = HashMap::with_capacity(sentences.len());
        for (i, s) in sentences.iter().enumerate() {
            if by_id.insert(s.id().to_string(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate sentence id `{}`", s.id())));
            }
        }
        Ok(Corpus { sentences, by_id })
    }

    pub fn get(&self, id: &str) -> Option<&AnnotatedSentence> {
        self.by_id.get(id).map(|&i| &self.sentences[i])
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-blank lines with their 1-based numbers.
fn lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let mut sentences = Vec::new();
    let mut seen = HashMap::new();
    for (n, line) in lines(path)? {
        let rec: SentenceJson =
            serde_json::from_str(&line).map_err(|e| Error::format(path, Some(n), e.to_string()))?;
        let s = rec.to_sentence().map_err(|e| Error::format(path, Some(n), e.to_string()))?;
        if let Some(first) = seen.insert(s.id().to_string(), n) {
            return Err(Error::format(path, Some(n), format!("duplicate id `{}` (first on line {first})", s.id())));
        }
        sentences.push(s);
    }
    Corpus::new(sentences)
}

pub fn write_corpus(path: &Path, sentences: &[AnnotatedSentence]) -> Result<()> {
    let mut w = create(path)?;
    for s in sentences {
        let line = serde_json::to_string(&SentenceJson::from_sentence(s)).expect("sentence serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn mode_name(mode: SpecMode) -> &'static str {
    match mode {
        SpecMode::Surface => "surface",
        SpecMode::SimplifiedSyntax => "path",
    }
}

pub fn parse_mode(name: &str) -> Result<SpecMode> {
    match name {
        "surface" => Ok(SpecMode::Surface),
        "path" => Ok(SpecMode::SimplifiedSyntax),
        other => Err(Error::Invalid(format!("unknown mode `{other}` (expected surface or path)"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    /// Either an inline sentence or `{"ref": "<corpus id>"}`.
    pub sentence: Value,
    pub selections: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecJson {
    pub mode: String,
    pub entries: Vec<EntryJson>,
}

fn sentence_value(v: &Value, corpus: Option<&Corpus>) -> Result<AnnotatedSentence> {
    if let Some(id) = v.get("ref") {
        let id = id.as_str().ok_or_else(|| Error::Invalid("`ref` must be a string".into()))?;
        let corpus = corpus.ok_or_else(|| Error::Invalid(format!("sentence ref `{id}` needs a corpus")))?;
        return corpus
            .get(id)
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("sentence ref `{id}` is not in the corpus")));
    }
    let rec: SentenceJson = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(format!("sentence: {e}")))?;
    rec.to_sentence()
}

pub fn entry_from_json(e: &EntryJson, corpus: Option<&Corpus>) -> Result<SpecEntry> {
    let sentence = sentence_value(&e.sentence, corpus)?;
    let selections = e.selections.iter().map(|&(s, end)| Span::new(s, end)).collect();
    Ok(SpecEntry::new(sentence, selections)?)
}

pub fn entry_to_json(entry: &SpecEntry) -> EntryJson {
    EntryJson {
        sentence: serde_json::to_value(SentenceJson::from_sentence(entry.sentence())).expect("sentence serializes"),
        selections: entry.selections().iter().map(|s| (s.start, s.end)).collect(),
    }
}

impl SpecJson {
    pub fn to_spec(&self, corpus: Option<&Corpus>) -> Result<Specification> {
        let mode = parse_mode(&self.mode)?;
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(index, e)| entry_from_json(e, corpus).map_err(|err| Error::Entry { index, source: Box::new(err) }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Specification::new(entries, mode)?)
    }

    pub fn from_spec(spec: &Specification) -> SpecJson {
        SpecJson { mode: mode_name(spec.mode()).to_string(), entries: spec.entries().iter().map(entry_to_json).collect() }
    }
}

pub fn load_spec(path: &Path, corpus: Option<&Corpus>) -> Result<Specification> {
    let json: SpecJson =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::format(path, None, e.to_string()))?;
    json.to_spec(corpus).map_err(|e| Error::format(path, None, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightsJson {
    /// Little-endian f64 bytes.
    Base64(String),
    Array(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct StageJson {
    name: String,
    epochs: usize,
    examples: usize,
    final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct MetaJson {
    seed: u64,
    lr_low: f64,
    lr_high: f64,
    lr_scale: f64,
    batch_size: usize,
    stages: Vec<StageJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ModelJson {
    version: u32,
    dim: usize,
    bias: f64,
    weights: WeightsJson,
    training_meta: MetaJson,
}

pub fn model_to_json(model: &ScorerModel) -> String {
    let bytes: Vec<u8> = model.weights.iter().flat_map(|w| w.to_le_bytes()).collect();
    let m = &model.meta;
    let json = ModelJson {
        version: model.version,
        dim: model.dim,
        bias: model.bias,
        weights: WeightsJson::Base64(base64::engine::general_purpose::STANDARD.encode(bytes)),
        training_meta: MetaJson {
            seed: m.seed,
            lr_low: m.lr_low,
            lr_high: m.lr_high,
            lr_scale: m.lr_scale,
            batch_size: m.batch_size,
            stages: m
                .stages
                .iter()
                .map(|s| StageJson { name: s.name.clone(), epochs: s.epochs, examples: s.examples, final_loss: s.final_loss })
                .collect(),
        },
    };
    serde_json::to_string(&json).expect("model serializes")
}

pub fn model_from_json(text: &str) -> Result<ScorerModel> {
    let json: ModelJson = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("model: {e}")))?;
    let weights = match json.weights {
        WeightsJson::Array(w) => w,
        WeightsJson::Base64(s) => {
            let bytes = base64::engine::general_purpose::STANDARD
                .decode(s)
                .map_err(|e| Error::Invalid(format!("model weights: {e}")))?;
            if bytes.len() % 8 != 0 {
                return Err(Error::Invalid("model weights: byte length is not a multiple of 8".into()));
            }
            bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect()
        }
    };
    let m = json.training_meta;
    let model = ScorerModel {
        version: json.version,
        dim: json.dim,
        bias: json.bias,
        weights,
        meta: TrainingMeta {
            seed: m.seed,
            lr_low: m.lr_low,
            lr_high: m.lr_high,
            lr_scale: m.lr_scale,
            batch_size: m.batch_size,
            stages: m
                .stages
                .into_iter()
                .map(|s| StageMeta { name: s.name, epochs: s.epochs, examples: s.examples, final_loss: s.final_loss })
                .collect(),
        },
    };
    model.validate()?;
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<ScorerModel> {
    model_from_json(&read_to_string(path)?).map_err(|e| Error::format(path, None, e.to_string()))
}

pub fn save_model(path: &Path, model: &ScorerModel) -> Result<()> {
    write_string(path, &model_to_json(model))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemJson {
    pub index: usize,
    pub seed: u64,
    pub rule: String,
    pub spec: SpecJson,
}

pub fn item_to_json(item: &GeneratedItem) -> ItemJson {
    ItemJson { index: item.index, seed: item.seed, rule: print(&item.rule), spec: SpecJson::from_spec(&item.spec) }
}

/// Rebuilds an item; the derivation is recomputed from the rule.
pub fn item_from_json(json: &ItemJson, costs: &CostTable) -> Result<GeneratedItem> {
    let rule = parse(&json.rule)?;
    let spec = json.spec.to_spec(None)?;
    let derivation = oracle_derivation(&rule, &spec, costs)?;
    Ok(GeneratedItem { index: json.index, seed: json.seed, rule, spec, derivation })
}

pub fn write_items(path: &Path, items: &[GeneratedItem]) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        let line = serde_json::to_string(&item_to_json(item)).expect("item serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_items(path: &Path, costs: &CostTable) -> Result<Vec<GeneratedItem>> {
    lines(path)?
        .into_iter()
        .map(|(n, line)| {
            let json: ItemJson = serde_json::from_str(&line).map_err(|e| Error::format(path, Some(n), e.to_string()))?;
            item_from_json(&json, costs).map_err(|e| Error::format(path, Some(n), e.to_string()))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHeader {
    pub format: String,
    pub version: u32,
    pub items: usize,
    pub examples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleJson {
    pub entry: EntryJson,
    pub current: String,
    pub candidate: String,
    pub label: u8,
    pub item: usize,
    pub step: usize,
}

fn example_to_json(ex: &TrainingExample) -> ExampleJson {
    ExampleJson {
        entry: entry_to_json(&ex.entry),
        current: print(&ex.current.pattern),
        candidate: print(&ex.candidate.pattern),
        label: ex.label as u8,
        item: ex.item,
        step: ex.step,
    }
}

fn example_from_json(json: &ExampleJson, costs: &CostTable) -> Result<TrainingExample> {
    if json.label > 1 {
        return Err(Error::Invalid(format!("label must be 0 or 1, got {}", json.label)));
    }
    Ok(TrainingExample {
        entry: entry_from_json(&json.entry, None)?,
        current: State::new(parse(&json.current)?, costs, json.step),
        candidate: State::new(parse(&json.candidate)?, costs, json.step + 1),
        label: json.label == 1,
        item: json.item,
        step: json.step,
    })
}

/// Header line, then one example per line.
pub fn write_training(path: &Path, items: usize, examples: &[TrainingExample]) -> Result<()> {
    let mut w = create(path)?;
    let header = TrainingHeader {
        format: TRAINING_FORMAT.to_string(),
        version: TRAINING_VERSION,
        items,
        examples: examples.len(),
    };
    writeln!(w, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(|e| Error::io(path, e))?;
    for ex in examples {
        let line = serde_json::to_string(&example_to_json(ex)).expect("example serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_training(path: &Path, costs: &CostTable) -> Result<Vec<TrainingExample>> {
    let mut rows = lines(path)?.into_iter();
    let Some((n, first)) = rows.next() else {
        return Err(Error::format(path, None, "missing header line"));
    };
    let header: TrainingHeader = serde_json::from_str(&first).map_err(|e| Error::format(path, Some(n), e.to_string()))?;
    if header.format != TRAINING_FORMAT || header.version != TRAINING_VERSION {
        return Err(Error::format(path, Some(n), format!("unsupported training file {} v{}", header.format, header.version)));
    }
    let mut out = Vec::with_capacity(header.examples);
    for (n, line) in rows {
        let json: ExampleJson = serde_json::from_str(&line).map_err(|e| Error::format(path, Some(n), e.to_string()))?;
        out.push(example_from_json(&json, costs).map_err(|e| Error::format(path, Some(n), e.to_string()))?);
    }
    if out.len() != header.examples {
        return Err(Error::format(
            path,
            None,
            format!("header announces {} examples, found {}", header.examples, out.len()),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EpisodeSentenceJson {
    pub sentence: SentenceJson,
    pub subj: (usize, usize),
    pub subj_type: String,
    pub obj: (usize, usize),
    pub obj_type: String,
    pub gold: String,
}

impl EpisodeSentenceJson {
    pub fn to_episode_sentence(&self) -> Result<EpisodeSentence> {
        let es = EpisodeSentence {
            sentence: self.sentence.to_sentence()?,
            subj: Span::new(self.subj.0, self.subj.1),
            subj_type: self.subj_type.clone(),
            obj: Span::new(self.obj.0, self.obj.1),
            obj_type: self.obj_type.clone(),
            gold: self.gold.clone(),
        };
        es.validate()?;
        Ok(es)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeJson {
    pub way: usize,
    pub shot: usize,
    /// Relation label to support sentences, in file order.
    pub support: serde_json::Map<String, Value>,
    pub queries: Vec<EpisodeSentenceJson>,
}

impl EpisodeJson {
    pub fn to_episode(&self) -> Result<Episode> {
        let mut support = Vec::with_capacity(self.support.len());
        for (label, sents) in &self.support {
            let sents: Vec<EpisodeSentenceJson> =
                serde_json::from_value(sents.clone()).map_err(|e| Error::Invalid(format!("support `{label}`: {e}")))?;
            let sents = sents.iter().map(EpisodeSentenceJson::to_episode_sentence).collect::<Result<Vec<_>>>()?;
            support.push((label.clone(), sents));
        }
        let queries = self.queries.iter().map(EpisodeSentenceJson::to_episode_sentence).collect::<Result<Vec<_>>>()?;
        let episode = Episode { way: self.way, shot: self.shot, support, queries };
        episode.validate()?;
        Ok(episode)
    }
}

pub fn load_episodes(path: &Path) -> Result<Vec<Episode>> {
    let json: Vec<EpisodeJson> =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::format(path, None, e.to_string()))?;
    json.iter()
        .enumerate()
        .map(|(i, e)| e.to_episode().map_err(|err| Error::format(path, None, format!("episode {i}: {err}"))))
        .collect()
}

pub fn load_background(path: &Path) -> Result<Vec<EpisodeSentence>> {
    let json: Vec<EpisodeSentenceJson> =
        serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::format(path, None, e.to_string()))?;
    json.iter()
        .enumerate()
        .map(|(i, s)| s.to_episode_sentence().map_err(|e| Error::format(path, None, format!("sentence {i}: {e}"))))
        .collect()
}

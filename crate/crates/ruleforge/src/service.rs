//! HTTP API for the browser workbench.
//!
//! Synthesis jobs run on the blocking pool behind a fair semaphore, so at
//! most `max_jobs` searches run at once and the rest wait in arrival order.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ruleforge_core::corpus::{query_corpus, Span};
use ruleforge_core::matcher::find_matches;
use ruleforge_core::pattern::{parse, print};

use ruleforge_core::scoring::ContextualScorer;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::{mpsc, Semaphore};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::formats::{Corpus, SentenceJson, SpecJson};
use crate::synth::{self, build_scorer, ScorerKind};

pub struct AppState {
    pub corpus: Corpus,
    pub model: Option<Arc<ContextualScorer>>,
    pub config: Config,
    jobs: Arc<Semaphore>,
}

impl AppState {
    pub fn new(corpus: Corpus, model: Option<Arc<ContextualScorer>>, config: Config) -> AppState {
        let jobs = Arc::new(Semaphore::new(config.max_jobs));
        AppState { corpus, model, config, jobs }
    }
}

/// A 4xx/5xx reply with a machine-readable body.
#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: String,
    location: Value,
}

impl ApiError {
    fn bad_request(error: impl Into<String>) -> ApiError {
        ApiError { status: StatusCode::BAD_REQUEST, error: error.into(), location: Value::Null }
    }
}

fn location(e: &Error) -> Value {
    use ruleforge_core::Error as Core;
    match e {
        Error::Core(Core::Syntax { offset, .. } | Core::UnknownField { offset, .. }) => json!({ "offset": offset }),
        Error::Entry { index, source } => {
            let mut inner = location(source);
            match inner.as_object_mut() {
                Some(obj) => {
                    obj.insert("entry".into(), json!(index));
                    inner
                }
                None => json!({ "entry": index }),
            }
        }
        _ => Value::Null,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> ApiError {
        let status = match &e {
            Error::Core(ruleforge_core::Error::Scorer { .. }) | Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError { status, location: location(&e), error: e.to_string() }
    }
}

impl From<ruleforge_core::Error> for ApiError {
    fn from(e: ruleforge_core::Error) -> ApiError {
        Error::from(e).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.error, "location": self.location }))).into_response()
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = std::result::Result<T, ApiError>;

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/synthesize", post(synthesize))
        .route("/api/match", post(match_rule))
        .route("/api/corpus", get(corpus_search))
        .route("/api/parse", post(parse_rule))
        .route("/api/linearize", post(linearize))
        .with_state(Arc::new(state))
}

/// Binds and serves until interrupted. Prints the bound address so callers
/// using port 0 can find it.
pub async fn serve(host: &str, port: u16, state: AppState) -> Result<()> {
    let listener = tokio::net::TcpListener::bind((host, port))
        .await
        .map_err(|e| Error::Invalid(format!("cannot bind {host}:{port}: {e}")))?;
    let addr: SocketAddr = listener.local_addr().map_err(|e| Error::Invalid(e.to_string()))?;
    println!("listening on http://{addr}");
    log::info!("serving {} sentences on {addr}", state.corpus.len());
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| Error::Invalid(format!("server: {e}")))
}

async fn health(State(app): State<Shared>) -> Json<Value> {
    Json(json!({ "status": "ok", "modelLoaded": app.model.is_some(), "corpusSize": app.corpus.len() }))
}

fn default_scorer() -> String {
    "augmented".into()
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthRequest {
    pub spec: SpecJson,
    #[serde(default = "default_scorer")]
    pub scorer: String,
    pub max_states: Option<usize>,
    #[serde(default)]
    pub trace: bool,
}

async fn synthesize(State(app): State<Shared>, Json(req): Json<SynthRequest>) -> ApiResult<Response> {
    let spec = req.spec.to_spec(Some(&app.corpus))?;
    let kind: ScorerKind = req.scorer.parse()?;
    let scorer = build_scorer(kind, &app.config, app.model.as_ref())?;
    let mut search = app.config.search.clone();
    if let Some(n) = req.max_states {
        if n == 0 {
            return Err(ApiError::bad_request("maxStates must be at least 1"));
        }
        search.max_states = n;
    }
    let permit = app.jobs.clone().acquire_owned().await.map_err(|e| ApiError::bad_request(e.to_string()))?;

    if !req.trace {
        let report = tokio::task::spawn_blocking(move || {
            let _permit = permit;
            synth::run(&spec, scorer.as_ref(), &search, |_| {})
        })
        .await
        .map_err(|e| ApiError::from(Error::Invalid(format!("job failed: {e}"))))??;
        return Ok(Json(report.1).into_response());
    }

    let (tx, rx) = mpsc::channel::<String>(256);
    tokio::task::spawn_blocking(move || {
        let _permit = permit;
        let events = tx.clone();
        let result = synth::run(&spec, scorer.as_ref(), &search, move |line| {
            // A closed channel means the client went away; the job runs on.
            let _ = events.blocking_send(serde_json::to_string(&line).expect("trace serializes"));
        });
        let last = match result {
            Ok((_, report)) => serde_json::to_string(&report).expect("report serializes"),
            Err(e) => {
                let e = ApiError::from(e);
                json!({ "error": e.error, "location": e.location }).to_string()
            }
        };
        let _ = tx.blocking_send(last);
    });
    let stream = futures::stream::unfold(rx, |mut rx| async move {
        rx.recv().await.map(|mut line| {
            line.push('\n');
            (Ok::<_, std::convert::Infallible>(line), rx)
        })
    });
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], Body::from_stream(stream)).into_response())
}

#[derive(Debug, Deserialize)]
pub struct MatchRequest {
    pub rule: String,
    #[serde(default)]
    pub sentences: Vec<SentenceJson>,
    #[serde(default)]
    pub ids: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct MatchResult {
    pub id: String,
    pub spans: Vec<(usize, usize)>,
}

async fn match_rule(State(app): State<Shared>, Json(req): Json<MatchRequest>) -> ApiResult<Json<Value>> {
    let rule = parse(&req.rule).map_err(Error::from)?;
    let mut sentences = Vec::new();
    for s in &req.sentences {
        sentences.push(s.to_sentence()?);
    }
    for id in &req.ids {
        let s = app.corpus.get(id).ok_or_else(|| ApiError {
            status: StatusCode::NOT_FOUND,
            error: format!("no sentence `{id}` in corpus"),
            location: json!({ "id": id }),
        })?;
        sentences.push(s.clone());
    }
    let results = sentences
        .iter()
        .map(|s| {
            let spans = find_matches(&rule, s)?.spans().iter().map(|sp| (sp.start, sp.end)).collect();
            Ok(MatchResult { id: s.id().to_string(), spans })
        })
        .collect::<ApiResult<Vec<_>>>()?;
    Ok(Json(json!({ "rule": print(&rule), "results": results })))
}

#[derive(Debug, Deserialize)]
pub struct CorpusQuery {
    /// Case-insensitive text search.
    pub q: Option<String>,
    /// Rule search.
    pub rule: Option<String>,
    pub limit: Option<usize>,
}

async fn corpus_search(State(app): State<Shared>, Query(query): Query<CorpusQuery>) -> ApiResult<Json<Value>> {
    let limit = query.limit.unwrap_or(20).min(200);
    let hits: Vec<Value> = if let Some(rule) = &query.rule {
        let rule = parse(rule).map_err(Error::from)?;
        query_corpus(&app.corpus.sentences, &rule, limit)?
            .into_iter()
            .map(|(s, span)| json!({ "id": s.id(), "text": s.text(), "span": [span.start, span.end], "sentence": SentenceJson::from_sentence(s) }))
            .collect()
    } else {
        let needle = query.q.unwrap_or_default().to_lowercase();
        app.corpus
            .sentences
            .iter()
            .filter(|s| s.text().contains(&needle))
            .take(limit)
            .map(|s| json!({ "id": s.id(), "text": s.text(), "sentence": SentenceJson::from_sentence(s) }))
            .collect()
    };
    Ok(Json(json!({ "sentences": hits })))
}

#[derive(Debug, Deserialize)]
pub struct ParseRequest {
    pub rule: String,
}

async fn parse_rule(Json(req): Json<ParseRequest>) -> ApiResult<Json<Value>> {
    let rule = parse(&req.rule).map_err(Error::from)?;
    Ok(Json(json!({ "rule": print(&rule), "complete": rule.is_complete(), "symbols": rule.linearize() })))
}

#[derive(Debug, Deserialize)]
pub struct LinearizeRequest {
    /// Inline sentence or `{"ref": id}`.
    pub sentence: Value,
    pub subj: (usize, usize),
    pub obj: (usize, usize),
}

async fn linearize(State(app): State<Shared>, Json(req): Json<LinearizeRequest>) -> ApiResult<Json<Value>> {
    let entry = crate::formats::EntryJson { sentence: req.sentence, selections: Vec::new() };
    let sentence = crate::formats::entry_from_json(&entry, Some(&app.corpus))?.sentence().clone();
    let (a, b) = (Span::new(req.subj.0, req.subj.1), Span::new(req.obj.0, req.obj.1));
    let path = sentence.path_sentence(a, b).map_err(Error::from)?;
    Ok(Json(json!({ "sentence": SentenceJson::from_sentence(&path), "selections": [[0, path.len()]] })))
}

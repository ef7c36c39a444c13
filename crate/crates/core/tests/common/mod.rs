#![allow(dead_code)]

use std::collections::HashSet;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::Router;
use parafuse::http::{ClientConfig, RetryPolicy};
use parafuse::syntax::ParseTree;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::{json, Value};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

#[derive(Debug, Clone)]
pub struct Captured {
    pub path: String,
    pub body: Value,
}

type Handler = dyn Fn(&str, &Value) -> (u16, Value) + Send + Sync;

#[derive(Clone)]
struct AppState {
    handler: Arc<Handler>,
    log: Arc<Mutex<Vec<Captured>>>,
}

async fn dispatch(State(s): State<AppState>, uri: Uri, body: Bytes) -> Response {
    let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
    let path = uri.path().to_string();
    s.log.lock().unwrap().push(Captured {
        path: path.clone(),
        body: body.clone(),
    });
    let (status, reply) = (s.handler)(&path, &body);
    (StatusCode::from_u16(status).unwrap(), axum::Json(reply)).into_response()
}

/// HTTP server on a loopback port that answers every POST with `handler`
/// and records each request body.
pub struct MockServer {
    pub base: String,
    log: Arc<Mutex<Vec<Captured>>>,
    stop: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start<F>(handler: F) -> Self
    where
        F: Fn(&str, &Value) -> (u16, Value) + Send + Sync + 'static,
    {
        let log = Arc::new(Mutex::new(Vec::new()));
        let state = AppState {
            handler: Arc::new(handler),
            log: log.clone(),
        };
        let (stop_tx, stop_rx) = tokio::sync::oneshot::channel::<()>();
        let (addr_tx, addr_rx) = std::sync::mpsc::channel();
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                let app = Router::new().fallback(dispatch).with_state(state);
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = stop_rx.await;
                    })
                    .await
                    .unwrap();
            });
        });
        let addr = addr_rx.recv_timeout(Duration::from_secs(10)).unwrap();
        MockServer {
            base: format!("http://{addr}"),
            log,
            stop: Some(stop_tx),
            thread: Some(thread),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub fn requests(&self) -> Vec<Captured> {
        self.log.lock().unwrap().clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.stop.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

pub fn fast_client() -> ClientConfig {
    ClientConfig {
        retry: RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(5),
        },
        max_in_flight: 4,
        rate_limit: None,
        timeout: Duration::from_secs(10),
    }
}

pub fn chat_reply(content: &str) -> Value {
    json!({ "choices": [{ "index": 0, "message": { "role": "assistant", "content": content } }] })
}

pub const CATEGORIES: [&str; 11] = [
    "hate",
    "hate/threatening",
    "harassment",
    "harassment/threatening",
    "self-harm",
    "self-harm/intent",
    "self-harm/instructions",
    "sexual",
    "sexual/minors",
    "violence",
    "violence/graphic",
];

pub fn moderation_reply(flagged: &[&str]) -> Value {
    let cats: serde_json::Map<String, Value> = CATEGORIES
        .iter()
        .map(|c| (c.to_string(), Value::Bool(flagged.contains(c))))
        .collect();
    json!({ "results": [{ "flagged": !flagged.is_empty(), "categories": cats }] })
}

/// Deterministic 4-dimensional vector for a text.
pub fn toy_vector(text: &str) -> Vec<f64> {
    let mut v = [1.0f64, 0.5, 0.25, 0.125];
    for (i, b) in text.bytes().enumerate() {
        v[i % 4] += f64::from(b % 17) / 17.0;
    }
    v.to_vec()
}

pub fn embedding_reply(body: &Value) -> Value {
    let data: Vec<Value> = body["input"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
        .map(|(i, t)| json!({ "index": i, "embedding": toy_vector(t.as_str().unwrap()) }))
        .collect();
    json!({ "data": data })
}

// ---- trees ----

/// Ordered labeled trees with 1 to `max_nodes` nodes. Node `i > 0` hangs
/// under a uniformly chosen earlier node; siblings keep index order.
pub fn tree_strategy(max_nodes: usize) -> impl Strategy<Value = ParseTree> {
    (1..=max_nodes).prop_flat_map(|n| {
        (
            prop::collection::vec(prop::sample::select(vec!["A", "B", "C", "x"]), n),
            prop::collection::vec(any::<prop::sample::Index>(), n),
        )
            .prop_map(|(labels, parents)| {
                let mut children: Vec<Vec<usize>> = vec![Vec::new(); labels.len()];
                for i in 1..labels.len() {
                    children[parents[i].index(i)].push(i);
                }
                build(0, &labels, &children)
            })
    })
}

fn build(i: usize, labels: &[&str], children: &[Vec<usize>]) -> ParseTree {
    let kids = children[i].iter().map(|&c| build(c, labels, children)).collect();
    ParseTree::new(labels[i], kids).unwrap()
}

/// Draws `n` values from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

struct Flat {
    labels: Vec<String>,
    /// ancestor[i][j]: node i is a proper ancestor of node j
    ancestor: Vec<Vec<bool>>,
}

/// Nodes in preorder with the ancestor relation.
fn flatten(t: &ParseTree) -> Flat {
    fn walk(t: &ParseTree, path: &mut Vec<usize>, labels: &mut Vec<String>, anc: &mut Vec<Vec<usize>>) {
        let me = labels.len();
        labels.push(t.label().to_string());
        anc.push(path.clone());
        path.push(me);
        for c in t.children() {
            walk(c, path, labels, anc);
        }
        path.pop();
    }
    let (mut labels, mut anc) = (Vec::new(), Vec::new());
    walk(t, &mut Vec::new(), &mut labels, &mut anc);
    let n = labels.len();
    let mut ancestor = vec![vec![false; n]; n];
    for (j, list) in anc.iter().enumerate() {
        for &i in list {
            ancestor[i][j] = true;
        }
    }
    Flat { labels, ancestor }
}

/// Minimum unit-cost edit script, found by enumerating every mapping that
/// preserves ancestry and sibling order. Exponential; meant for tiny trees.
pub fn ted_oracle(a: &ParseTree, b: &ParseTree) -> usize {
    let (fa, fb) = (flatten(a), flatten(b));
    let mut best = fa.labels.len() + fb.labels.len();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = HashSet::new();
    search(&fa, &fb, 0, &mut pairs, &mut used, &mut best);
    best
}

fn search(a: &Flat, b: &Flat, i: usize, pairs: &mut Vec<(usize, usize)>, used: &mut HashSet<usize>, best: &mut usize) {
    if i == a.labels.len() {
        let relabels = pairs.iter().filter(|&&(x, y)| a.labels[x] != b.labels[y]).count();
        let cost = relabels + (a.labels.len() - pairs.len()) + (b.labels.len() - pairs.len());
        *best = (*best).min(cost);
        return;
    }
    search(a, b, i + 1, pairs, used, best);
    for j in 0..b.labels.len() {
        if used.contains(&j) {
            continue;
        }
        // preorder positions and ancestry must agree with every earlier pair
        let ok = pairs
            .iter()
            .all(|&(x, y)| y < j && a.ancestor[x][i] == b.ancestor[y][j]);
        if !ok {
            continue;
        }
        pairs.push((i, j));
        used.insert(j);
        search(a, b, i + 1, pairs, used, best);
        used.remove(&j);
        pairs.pop();
    }
}

// ---- lexical fixtures ----

pub fn fixture_pairs() -> parafuse::corpus::Corpus {
    parafuse::corpus::load_corpus(fixture("lexical_pairs.jsonl"), parafuse::corpus::PairFormat::Jsonl).unwrap()
}

pub fn fixture_json(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

/// Every disagreement between the toolkit and the recorded fixture values:
/// reference-implementation numbers within `tol`, hand-traced edit rates exactly.
pub fn metric_fixture_mismatches(tol: f64) -> Vec<String> {
    use parafuse::lexical::*;

    let corpus = fixture_pairs();
    let expected = fixture_json("lexical_expected.json");
    let hand = fixture_json("lexical_hand.json");
    let mut bad = Vec::new();
    let mut close = |what: String, got: f64, want: f64| {
        if (got - want).abs() > tol {
            bad.push(format!("{what}: got {got}, want {want}"));
        }
    };
    let mut toks = Vec::new();
    for p in corpus.iter() {
        let (r, h) = (tokenize(&p.source_text), tokenize(&p.paraphrase_text));
        let e = &expected["pairs"][&p.id];
        let want = |k: &str| e[k].as_f64().unwrap_or_else(|| panic!("{} {k}", p.id));
        close(
            format!("{} sentence_bleu/none", p.id),
            sentence_bleu(&r, &h, Smoothing::None).unwrap(),
            want("sentence_bleu_none"),
        );
        close(
            format!("{} sentence_bleu/method1", p.id),
            sentence_bleu(&r, &h, Smoothing::Method1).unwrap(),
            want("sentence_bleu_method1"),
        );
        close(
            format!("{} google_bleu", p.id),
            google_bleu(&r, &h).unwrap(),
            want("google_bleu"),
        );
        close(format!("{} meteor", p.id), meteor(&r, &h).unwrap(), want("meteor"));
        close(
            format!("{} rouge1", p.id),
            rouge(&r, &h, RougeVariant::R1).unwrap(),
            want("rouge1"),
        );
        close(
            format!("{} rouge2", p.id),
            rouge(&r, &h, RougeVariant::R2).unwrap(),
            want("rouge2"),
        );
        close(
            format!("{} rougeL", p.id),
            rouge(&r, &h, RougeVariant::RL).unwrap(),
            want("rougeL"),
        );
        close(
            format!("{} ter/sacrebleu", p.id),
            ter(&r, &h).unwrap(),
            want("ter_sacrebleu"),
        );
        toks.push((r, h));
    }
    for (key, slice, smoothing) in [
        ("corpus_bleu_none", &toks[..], Smoothing::None),
        ("corpus_bleu_method1", &toks[..], Smoothing::Method1),
        ("corpus_bleu_first3_none", &toks[..3], Smoothing::None),
        ("corpus_bleu_first3_method1", &toks[..3], Smoothing::Method1),
    ] {
        close(
            key.to_string(),
            corpus_bleu(slice, smoothing).unwrap(),
            expected[key].as_f64().unwrap(),
        );
    }

    let frac = |id: &str, k: &str| {
        let v = &hand[id][k];
        v[0].as_u64().unwrap() as f64 / v[1].as_u64().unwrap() as f64
    };
    for (p, (r, h)) in corpus.iter().zip(&toks) {
        let got = [
            ("wer", wer(r, h).unwrap()),
            ("ter", ter(r, h).unwrap()),
            ("cer", cer(&p.source_text, &p.paraphrase_text).unwrap()),
        ];
        for (k, v) in got {
            let want = frac(&p.id, k);
            if v != want {
                bad.push(format!("{} {k}: got {v}, want exactly {want}", p.id));
            }
        }
    }
    bad
}

mod common;

use std::fs;
use std::path::Path;

use parafuse::cli::run;
use parafuse::corpus::{load_corpus, PairFormat};
use serde_json::{json, Value};
use tempfile::TempDir;

use common::{chat_reply, fixture, moderation_reply, MockServer};

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run(["parafuse", "--help"]), 0);
    assert_eq!(run(["parafuse", "--version"]), 0);
    assert_eq!(run(["parafuse", "evaluate"]), 1);
    assert_eq!(run(["parafuse", "evaluate", "--pairs", "x", "--bogus"]), 1);
}

#[test]
fn evaluate_csv_and_markdown() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("lexical_pairs.jsonl");
    let csv = dir.path().join("r.csv");
    assert_eq!(run(["parafuse", "evaluate", "--pairs", p(&pairs), "--out", p(&csv)]), 0);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("subset,count,bow_overlap,corpus_bleu,corpus_bleu2,"));
    let subsets: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(subsets, ["custom:toy", "mrpc", "para_common", "paws", "qqp"]);

    let md = dir.path().join("r.md");
    assert_eq!(
        run([
            "parafuse",
            "evaluate",
            "--pairs",
            p(&pairs),
            "--group-by",
            "all",
            "--format",
            "markdown",
            "--out",
            p(&md)
        ]),
        0
    );
    assert!(fs::read_to_string(&md).unwrap().contains("| all | 10 |"));
}

#[test]
fn evaluate_with_trees_embeddings_and_dump() {
    let dir = TempDir::new().unwrap();
    let emb = write(
        &dir,
        "emb.jsonl",
        &[
            json!({"id": "substituted", "source_vec": [1.0, 0.0], "paraphrase_vec": [1.0, 0.0], "model": "toy"}),
            json!({"id": "rewritten", "source_vec": [1.0, 0.0], "paraphrase_vec": [0.5, 0.8660254037844386], "model": "toy"}),
        ]
        .iter()
        .map(|v| v.to_string() + "\n")
        .collect::<String>(),
    );
    let out = dir.path().join("r.json");
    let dump = dir.path().join("dump.jsonl");
    let code = run([
        "parafuse",
        "evaluate",
        "--pairs",
        p(&fixture("rewrite_pairs.jsonl")),
        "--trees",
        p(&fixture("rewrite_trees.jsonl")),
        "--embeddings",
        p(&emb),
        "--out",
        p(&out),
        "--dump-pairs",
        p(&dump),
    ]);
    assert_eq!(code, 0);
    let raw = fs::read_to_string(&out).unwrap();
    let report: Value = serde_json::from_str(&raw).unwrap();
    let m = &report[0]["metrics"];
    assert_eq!(report[0]["subset"], "custom:rewrite");
    assert!((m["semantic.toy"].as_f64().unwrap() - 0.75).abs() < 1e-9);
    assert_eq!(m["ted_f"], 21.5);
    let pos = |k: &str| raw.find(&format!("\"{k}\"")).unwrap();
    assert!(pos("semantic.toy") < pos("ted_f") && pos("ted_f") < pos("ted_3") && pos("np_kernel") < pos("bow_overlap"));
    assert_eq!(fs::read_to_string(&dump).unwrap().lines().count(), 2);
}

#[test]
fn evaluate_rejects_inconsistent_config() {
    let pairs = fixture("lexical_pairs.jsonl");
    assert_eq!(
        run(["parafuse", "evaluate", "--pairs", p(&pairs), "--metrics", "syntactic"]),
        1
    );
    assert_eq!(
        run(["parafuse", "evaluate", "--pairs", p(&pairs), "--metrics", "semantic"]),
        1
    );
    assert_eq!(run(["parafuse", "evaluate", "--pairs", "/nonexistent.jsonl"]), 1);
}

#[test]
fn validate_reports_join_problems() {
    let dir = TempDir::new().unwrap();
    let pairs = fixture("rewrite_pairs.jsonl");
    let trees = fixture("rewrite_trees.jsonl");
    assert_eq!(
        run(["parafuse", "validate", "--pairs", p(&pairs), "--trees", p(&trees)]),
        0
    );
    assert_eq!(run(["parafuse", "validate", "--trees", p(&trees)]), 0);

    let partial = write(
        &dir,
        "t.jsonl",
        &(json!({"id": "substituted", "source_tree": "(S (NN a))", "paraphrase_tree": "(S (NN b))"}).to_string()
            + "\n"),
    );
    assert_eq!(
        run(["parafuse", "validate", "--pairs", p(&pairs), "--trees", p(&partial)]),
        1
    );

    let broken = write(
        &dir,
        "b.jsonl",
        &(json!({"id": "x", "source_tree": "(S (NN a)", "paraphrase_tree": "(S)"}).to_string() + "\n"),
    );
    assert_eq!(run(["parafuse", "validate", "--trees", p(&broken)]), 1);
    assert_eq!(run(["parafuse", "validate"]), 1);
}

const FIVE: &str = "1. The feline rested on the rug.\n2. A cat was sitting on the mat.\n3. On the mat sat the cat.\n\
                    4. The mat had a cat on it.\n5. There was a cat sitting on the mat.";

#[test]
fn generate_then_pool() {
    let server = MockServer::start(|path, body| {
        if path.ends_with("moderations") {
            return (200, moderation_reply(&[]));
        }
        let prompt = body["messages"][0]["content"].as_str().unwrap();
        if prompt.contains("gato") {
            (200, chat_reply("Error"))
        } else {
            (200, chat_reply(FIVE))
        }
    });
    let dir = TempDir::new().unwrap();
    let sources = write(
        &dir,
        "s.jsonl",
        "{\"id\":\"s1\",\"text\":\"The cat sat on the mat.\",\"origin\":\"qqp\"}\n\
         {\"id\":\"s2\",\"text\":\"El gato duerme.\",\"origin\":\"qqp\"}\n",
    );
    let audit = dir.path().join("audit.jsonl");
    let out = dir.path().join("pairs.tsv");
    let code = run([
        "parafuse",
        "generate",
        "--sources",
        p(&sources),
        "--endpoint",
        &server.url("/v1/chat/completions"),
        "--model",
        "m",
        "--variant",
        "english_guard",
        "--moderation-endpoint",
        &server.url("/v1/moderations"),
        "--audit",
        p(&audit),
        "--out",
        p(&out),
        "--backoff-ms",
        "1",
    ]);
    assert_eq!(code, 0);
    let corpus = load_corpus(&out, PairFormat::Tsv).unwrap();
    assert_eq!(corpus.len(), 15);
    let audit_lines: Vec<Value> = fs::read_to_string(&audit)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(audit_lines[0]["status"], "ok");
    assert_eq!(audit_lines[1]["status"], "non_english");

    let pooled = dir.path().join("pooled.jsonl");
    assert_eq!(
        run(["parafuse", "pool", "--records", p(&audit), "--out", p(&pooled)]),
        0
    );
    assert_eq!(load_corpus(&pooled, PairFormat::Jsonl).unwrap(), corpus);
}

#[test]
fn strict_remote_failure_exits_2() {
    let server = MockServer::start(|_, _| (500, json!({})));
    let dir = TempDir::new().unwrap();
    let sources = write(
        &dir,
        "s.jsonl",
        "{\"id\":\"s1\",\"text\":\"Hello there.\",\"origin\":\"mrpc\"}\n",
    );
    let args = |strict: bool| {
        let mut a = vec![
            "parafuse".to_string(),
            "generate".into(),
            "--sources".into(),
            p(&sources).into(),
            "--endpoint".into(),
            server.url("/chat"),
            "--model".into(),
            "m".into(),
            "--retries".into(),
            "0".into(),
            "--audit".into(),
            p(&dir.path().join("a.jsonl")).into(),
            "--out".into(),
            p(&dir.path().join("o.jsonl")).into(),
        ];
        if strict {
            a.push("--strict".into());
        }
        a
    };
    assert_eq!(run(args(true)), 2);
    assert_eq!(run(args(false)), 0);
}

#[test]
fn filter_and_judge_commands() {
    let server = MockServer::start(|path, body| {
        if path == "/mod" {
            let bad = body["input"].as_str().unwrap().contains("hate");
            return (200, moderation_reply(if bad { &["hate"] } else { &[] }));
        }
        (
            200,
            chat_reply(
                "{\"Semantic Similarity\": 4, \"Lexical Diversity\": 4, \"Syntactic Diversity\": 3, \
                 \"Grammatical Correctness\": 5}",
            ),
        )
    });
    let dir = TempDir::new().unwrap();
    let pairs = write(
        &dir,
        "p.jsonl",
        "{\"id\":\"a\",\"source\":\"I hate rain.\",\"paraphrase\":\"Rain is awful.\",\"origin\":\"qqp\"}\n\
         {\"id\":\"b\",\"source\":\"I like tea.\",\"paraphrase\":\"Tea pleases me.\",\"origin\":\"qqp\"}\n",
    );
    let kept = dir.path().join("kept.jsonl");
    let dropped = dir.path().join("dropped.jsonl");
    let code = run([
        "parafuse",
        "filter",
        "--pairs",
        p(&pairs),
        "--endpoint",
        &server.url("/mod"),
        "--out",
        p(&kept),
        "--dropped",
        p(&dropped),
    ]);
    assert_eq!(code, 0);
    assert_eq!(load_corpus(&kept, PairFormat::Jsonl).unwrap().len(), 1);
    let log: Value = serde_json::from_str(fs::read_to_string(&dropped).unwrap().trim()).unwrap();
    assert_eq!(log, json!({"id": "a", "categories": ["hate"]}));

    let ratings = dir.path().join("r.csv");
    let code = run([
        "parafuse",
        "judge",
        "--pairs",
        p(&kept),
        "--endpoint",
        &server.url("/chat"),
        "--model",
        "judge",
        "--out",
        p(&ratings),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        fs::read_to_string(&ratings).unwrap(),
        "id,semantic_similarity,lexical_diversity,syntactic_diversity,grammatical_correctness,error\nb,4,4,3,5,\n"
    );
}

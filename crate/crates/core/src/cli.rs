//! Command-line front end. `run` returns the process exit code: 0 on
//! success, 1 for bad input or configuration, 2 when a remote service
//! fails under `--strict`.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use serde_json::json;

use crate::corpus::{
    join_check, load_corpus, load_embeddings, load_tree_sidecar, write_pairs, Corpus, EmbeddingRecord, PairFormat,
    TreeSidecar,
};
use crate::http::{ClientConfig, RetryPolicy};
use crate::lexical::SynonymLexicon;
use crate::pipeline::{
    dedupe_corpus, filter_offensive, generate, judge_pairs, pool_corpus, read_generation_records, read_sources,
    write_generation_records, FailurePolicy, GenerateOptions, HttpChat, HttpModerator, LlmConfig, Moderator,
    PromptTemplate, PromptVariant,
};
use crate::report::{
    evaluate_with_dump, render_report, write_pair_dump, EvalConfig, EvalInputs, GroupBy, MetricSet, OutputFormat,
};
use crate::semantic::{EmbeddingProvider, FileProvider, HttpProvider, HttpProviderConfig};
use crate::syntax::parse_bracket;

#[derive(Debug, Parser)]
#[command(name = "parafuse", version, about = "Paraphrase corpus construction and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a pair corpus and write a per-subset report
    Evaluate(EvaluateArgs),
    /// Generate paraphrases for source sentences and pool them into pairs
    Generate(GenerateArgs),
    /// Drop pairs whose source sentence is flagged by a moderation endpoint
    Filter(FilterArgs),
    /// Rate pairs with an LLM judge
    Judge(JudgeArgs),
    /// Turn generation records into a deduplicated pair corpus
    Pool(PoolArgs),
    /// Check pair, tree and embedding files and how they join
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RemoteArgs {
    /// Retries for 429, 5xx and connection errors
    #[arg(long, default_value_t = 5)]
    retries: u32,
    /// First backoff delay in milliseconds; doubles on each retry
    #[arg(long, default_value_t = 1000)]
    backoff_ms: u64,
    /// Maximum concurrent requests
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
    /// Requests per second (token bucket); unlimited when absent
    #[arg(long)]
    rate_limit: Option<f64>,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
}

impl RemoteArgs {
    fn client(&self) -> ClientConfig {
        ClientConfig {
            retry: RetryPolicy {
                max_retries: self.retries,
                base_delay: Duration::from_millis(self.backoff_ms),
            },
            max_in_flight: self.max_in_flight,
            rate_limit: self.rate_limit,
            timeout: Duration::from_secs(self.timeout_secs),
        }
    }
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Pairs file (.jsonl or .tsv)
    #[arg(long)]
    pairs: PathBuf,
    /// Parse-tree sidecar (JSONL)
    #[arg(long)]
    trees: Option<PathBuf>,
    /// Embeddings sidecar (JSONL); one provider per model it contains
    #[arg(long)]
    embeddings: Vec<PathBuf>,
    /// Embedding endpoint for --embed-model
    #[arg(long, requires = "embed_model")]
    embed_endpoint: Option<String>,
    #[arg(long, requires = "embed_endpoint")]
    embed_model: Vec<String>,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    /// Metric families: lexical, syntactic, semantic (comma separated). Default: every family with inputs
    #[arg(long)]
    metrics: Option<MetricSet>,
    /// csv, json or markdown; defaults to the --out extension, else json
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long, default_value = "origin")]
    group_by: GroupBy,
    /// Always report these subsets, even when empty
    #[arg(long = "subset")]
    subsets: Vec<String>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    parallelism: usize,
    /// METEOR synonym groups, one per line
    #[arg(long)]
    synonyms: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-pair values as JSONL
    #[arg(long)]
    dump_pairs: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Source sentences, JSONL {"id","text","origin"}
    #[arg(long)]
    sources: PathBuf,
    /// Chat completions endpoint
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    #[arg(long, default_value = "plain")]
    variant: PromptVariant,
    /// Custom prompt template containing `$Source Sentence`
    #[arg(long, conflicts_with = "variant")]
    template: Option<PathBuf>,
    /// Moderate each source first and skip flagged ones
    #[arg(long)]
    moderation_endpoint: Option<String>,
    #[arg(long, default_value = "generation.audit.jsonl")]
    audit: PathBuf,
    #[arg(long, default_value = "pairs.jsonl")]
    out: PathBuf,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct FilterArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// Moderation endpoint
    #[arg(long)]
    endpoint: String,
    #[arg(long, default_value = "kept.jsonl")]
    out: PathBuf,
    /// JSONL log of dropped and failed pairs
    #[arg(long, default_value = "dropped.jsonl")]
    dropped: PathBuf,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct JudgeArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long)]
    endpoint: String,
    #[arg(long)]
    model: String,
    /// Ratings table (CSV); stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    remote: RemoteArgs,
}

#[derive(Debug, Args)]
struct PoolArgs {
    /// Generation records (the audit JSONL of `generate`)
    #[arg(long)]
    records: PathBuf,
    #[arg(long, default_value = "pairs.jsonl")]
    out: PathBuf,
    /// Keep duplicate pairs across sources
    #[arg(long)]
    no_dedupe: bool,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long)]
    trees: Option<PathBuf>,
    #[arg(long)]
    embeddings: Vec<PathBuf>,
}

/// Error carrying whether a remote service caused it.
#[derive(Debug)]
struct Failure {
    error: anyhow::Error,
    remote: bool,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            error: e.into(),
            remote: false,
        }
    }
}

fn remote_if(strict: bool, is_remote: bool, error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        error: error.into(),
        remote: strict && is_remote,
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Filter(a) => filter_cmd(a),
        Command::Judge(a) => judge_cmd(a),
        Command::Pool(a) => pool_cmd(a),
        Command::Validate(a) => validate_cmd(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            if f.remote {
                2
            } else {
                1
            }
        }
    }
}

fn read_pairs(path: &Path) -> Result<Corpus> {
    load_corpus(path, PairFormat::from_path(path)).with_context(|| format!("reading {}", path.display()))
}

fn read_embeddings(paths: &[PathBuf]) -> Result<Vec<EmbeddingRecord>> {
    let mut all = Vec::new();
    for p in paths {
        all.extend(load_embeddings(p).with_context(|| format!("reading {}", p.display()))?);
    }
    Ok(all)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn evaluate_cmd(a: EvaluateArgs) -> Result<(), Failure> {
    let corpus = read_pairs(&a.pairs)?;
    let trees: Option<TreeSidecar> = a
        .trees
        .as_ref()
        .map(|p| load_tree_sidecar(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;

    let mut providers: Vec<Box<dyn EmbeddingProvider>> = Vec::new();
    for fp in FileProvider::by_model(read_embeddings(&a.embeddings)?)? {
        providers.push(Box::new(fp));
    }
    if let Some(endpoint) = &a.embed_endpoint {
        for model in &a.embed_model {
            providers.push(Box::new(HttpProvider::new(HttpProviderConfig {
                endpoint: endpoint.clone(),
                model: model.clone(),
                batch_size: a.batch_size,
                client: a.remote.client(),
            })?));
        }
    }

    let metrics = a.metrics.unwrap_or(MetricSet {
        semantic: !providers.is_empty(),
        syntactic: trees.is_some(),
        lexical: true,
    });
    let format = match (a.format, &a.out) {
        (Some(f), _) => f,
        (None, Some(p)) => p
            .extension()
            .and_then(|e| e.to_str())
            .and_then(|e| e.parse().ok())
            .unwrap_or_default(),
        (None, None) => OutputFormat::Json,
    };
    let synonyms = a
        .synonyms
        .as_ref()
        .map(|p| SynonymLexicon::load(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let config = EvalConfig {
        metrics,
        format,
        group_by: a.group_by,
        parallelism: a.parallelism,
        strict: a.strict,
        subsets: a.subsets,
        synonyms,
    };
    let inputs = EvalInputs {
        corpus: &corpus,
        trees: trees.as_ref(),
        providers: &providers,
    };
    let (reports, dump) = evaluate_with_dump(&inputs, &config).map_err(|e| remote_if(a.strict, e.is_remote(), e))?;
    for r in &reports {
        for (metric, skips) in &r.skip_reasons {
            for (id, reason) in skips {
                log::debug!("{}: skipped {id} for {metric}: {reason}", r.subset);
            }
        }
    }
    if let Some(p) = &a.dump_pairs {
        write_pair_dump(create(p)?, &dump)?;
    }
    write_output(a.out.as_deref(), &render_report(&reports, config.format)?)?;
    Ok(())
}

fn generate_cmd(a: GenerateArgs) -> Result<(), Failure> {
    let sources = read_sources(File::open(&a.sources).with_context(|| format!("opening {}", a.sources.display()))?)
        .with_context(|| format!("reading {}", a.sources.display()))?;
    let template = match &a.template {
        Some(p) => PromptTemplate::load(p)?,
        None => PromptTemplate::builtin(a.variant),
    };
    let mut llm = LlmConfig::new(&a.endpoint, &a.model);
    llm.client = a.remote.client();
    let chat = HttpChat::new(llm)?;
    let moderator = a
        .moderation_endpoint
        .as_ref()
        .map(|e| HttpModerator::new(e, &a.remote.client()))
        .transpose()?;
    let opts = GenerateOptions {
        max_in_flight: a.remote.max_in_flight,
        strict: a.strict,
    };
    let records = generate(
        &sources,
        &chat,
        &template,
        moderator.as_ref().map(|m| m as &dyn Moderator),
        opts,
    )
    .map_err(|e| remote_if(a.strict, e.is_remote(), e))?;
    write_generation_records(create(&a.audit)?, &records)?;
    let (pooled, degenerate) = pool_corpus(&records)?;
    let corpus = dedupe_corpus(&pooled);
    write_pairs(&corpus, &a.out, PairFormat::from_path(&a.out))?;
    info!(
        "{} records, {} pairs after dedup ({} degenerate pools)",
        records.len(),
        corpus.len(),
        degenerate.len()
    );
    Ok(())
}

fn filter_cmd(a: FilterArgs) -> Result<(), Failure> {
    let corpus = read_pairs(&a.pairs)?;
    let moderator = HttpModerator::new(&a.endpoint, &a.remote.client())?;
    let policy = if a.strict {
        FailurePolicy::Strict
    } else {
        FailurePolicy::Skip
    };
    let out = filter_offensive(&corpus, &moderator, policy, a.remote.max_in_flight)
        .map_err(|e| remote_if(a.strict, e.is_remote(), e))?;
    write_pairs(&out.kept, &a.out, PairFormat::from_path(&a.out))?;
    let mut log = create(&a.dropped)?;
    for (id, categories) in &out.dropped {
        serde_json::to_writer(&mut log, &json!({ "id": id, "categories": categories }))?;
        log.write_all(b"\n")?;
    }
    for (id, error) in &out.failed {
        serde_json::to_writer(&mut log, &json!({ "id": id, "error": error }))?;
        log.write_all(b"\n")?;
    }
    log.flush()?;
    info!(
        "kept {}, dropped {}, failed {}",
        out.kept.len(),
        out.dropped.len(),
        out.failed.len()
    );
    Ok(())
}

fn judge_cmd(a: JudgeArgs) -> Result<(), Failure> {
    let corpus = read_pairs(&a.pairs)?;
    let mut llm = LlmConfig::new(&a.endpoint, &a.model);
    llm.client = a.remote.client();
    let chat = HttpChat::new(llm)?;
    let outcomes = judge_pairs(&corpus, &chat, a.remote.max_in_flight, a.strict)
        .map_err(|e| remote_if(a.strict, e.is_remote(), e))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "id",
        "semantic_similarity",
        "lexical_diversity",
        "syntactic_diversity",
        "grammatical_correctness",
        "error",
    ])?;
    for o in &outcomes {
        let mut row = vec![o.id.clone()];
        match &o.ratings {
            Some(r) => row.extend(r.as_array().map(|v| v.to_string())),
            None => row.extend(std::iter::repeat_n(String::new(), 4)),
        }
        row.push(o.error.clone().unwrap_or_default());
        w.write_record(&row)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?;
    write_output(a.out.as_deref(), &text)?;
    Ok(())
}

fn pool_cmd(a: PoolArgs) -> Result<(), Failure> {
    let records =
        read_generation_records(File::open(&a.records).with_context(|| format!("opening {}", a.records.display()))?)
            .with_context(|| format!("reading {}", a.records.display()))?;
    let (pooled, _) = pool_corpus(&records)?;
    let corpus = if a.no_dedupe { pooled } else { dedupe_corpus(&pooled) };
    write_pairs(&corpus, &a.out, PairFormat::from_path(&a.out))?;
    Ok(())
}

fn validate_cmd(a: ValidateArgs) -> Result<(), Failure> {
    if a.pairs.is_none() && a.trees.is_none() && a.embeddings.is_empty() {
        return Err(anyhow!("nothing to validate: pass --pairs, --trees or --embeddings").into());
    }
    let mut problems = 0usize;
    let corpus = a.pairs.as_deref().map(read_pairs).transpose()?;
    if let Some(c) = &corpus {
        println!("pairs: {} ok", c.len());
    }
    let trees = match &a.trees {
        Some(p) => {
            let t = load_tree_sidecar(p).with_context(|| format!("reading {}", p.display()))?;
            let mut ids: Vec<&str> = t.iter().map(|(id, _)| id).collect();
            ids.sort_unstable();
            for id in ids {
                let e = t.get(id).expect("id from sidecar");
                for (side, s) in [("source_tree", &e.source_tree), ("paraphrase_tree", &e.paraphrase_tree)] {
                    if let Err(err) = parse_bracket(s) {
                        println!("tree {id} {side}: {err}");
                        problems += 1;
                    }
                }
            }
            println!("trees: {} entries", t.len());
            Some(t)
        }
        None => None,
    };
    let embeddings = read_embeddings(&a.embeddings)?;
    if !a.embeddings.is_empty() {
        FileProvider::by_model(embeddings.clone())?;
        println!("embeddings: {} records", embeddings.len());
    }
    if let Some(c) = &corpus {
        let join = join_check(c, trees.as_ref(), &embeddings);
        for id in &join.missing_trees {
            println!("missing tree: {id}");
        }
        for (model, ids) in &join.missing_embeddings {
            for id in ids {
                println!("missing embedding ({model}): {id}");
            }
        }
        problems += join.missing_trees.len() + join.missing_embeddings.values().map(Vec::len).sum::<usize>();
    }
    if problems > 0 {
        return Err(anyhow!("{problems} problem(s) found").into());
    }
    println!("ok");
    Ok(())
}

use std::collections::BTreeMap;

use indexmap::IndexMap;
use log::{info, warn};
use serde::Serialize;

use super::{semantic_column, EvalConfig, GroupBy, ReportError, SubsetReport, POOLED_COLUMNS, SYNTACTIC_COLUMNS};
use crate::corpus::{Corpus, SentencePair, TreeSidecar};
use crate::lexical::{tokenize, BleuStats, LexicalProfiler, LexicalScores, Meteor, Smoothing};
use crate::semantic::{semantic_score, EmbeddingProvider};
use crate::syntax::{parse_bracket, syntax_scores};

pub struct EvalInputs<'a> {
    pub corpus: &'a Corpus,
    pub trees: Option<&'a TreeSidecar>,
    pub providers: &'a [Box<dyn EmbeddingProvider>],
}

/// Per-pair values behind the report means, one line per pair in
/// `--dump-pairs` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairDump {
    pub id: String,
    pub subset: String,
    pub metrics: IndexMap<String, f64>,
}

#[derive(Debug, Clone)]
struct Skip {
    reason: String,
    remote: bool,
}

impl Skip {
    fn local(reason: impl Into<String>) -> Self {
        Skip {
            reason: reason.into(),
            remote: false,
        }
    }
}

type Outcome = Result<f64, Skip>;

struct PairEval {
    /// aligned with the column list; pooled columns hold the lexical outcome
    values: Vec<Outcome>,
    bleu: Option<BleuStats>,
}

struct Plan<'a> {
    columns: Vec<String>,
    inputs: &'a EvalInputs<'a>,
    config: &'a EvalConfig,
    profiler: LexicalProfiler,
}

impl Plan<'_> {
    fn eval(&self, pair: &SentencePair) -> PairEval {
        let mut values = Vec::with_capacity(self.columns.len());
        let m = self.config.metrics;
        if m.semantic {
            for p in self.inputs.providers {
                values.push(semantic_score(pair, p.as_ref()).map(|s| s.value).map_err(|e| Skip {
                    remote: e.is_remote(),
                    reason: e.to_string(),
                }));
            }
        }
        if m.syntactic {
            match self.syntax(pair) {
                Ok(s) => values.extend([Ok(s.ted_f as f64), Ok(s.ted_3 as f64), Ok(s.st_kernel), Ok(s.np_kernel)]),
                Err(reason) => values.extend(std::iter::repeat_n(Err(Skip::local(reason)), SYNTACTIC_COLUMNS.len())),
            }
        }
        let mut bleu = None;
        if m.lexical {
            match self.profiler.profile(pair) {
                Ok(scores) => {
                    bleu = Some(BleuStats::from_pair(
                        &tokenize(&pair.source_text),
                        &tokenize(&pair.paraphrase_text),
                    ));
                    values.extend(scores.named().map(|(_, v)| Ok(v)));
                }
                Err(e) => {
                    let skip = Skip::local(e.to_string());
                    values.extend((0..LexicalScores::COLUMNS.len()).map(|_| Err(skip.clone())));
                }
            }
        }
        PairEval { values, bleu }
    }

    fn syntax(&self, pair: &SentencePair) -> Result<crate::syntax::SyntaxScores, String> {
        let entry = self
            .inputs
            .trees
            .and_then(|t| t.get(&pair.id))
            .ok_or_else(|| "missing tree".to_string())?;
        let s = parse_bracket(&entry.source_tree).map_err(|e| format!("source tree: {e}"))?;
        let p = parse_bracket(&entry.paraphrase_tree).map_err(|e| format!("paraphrase tree: {e}"))?;
        Ok(syntax_scores(&s, &p))
    }
}

fn validate(config: &EvalConfig, inputs: &EvalInputs<'_>) -> Result<Vec<String>, ReportError> {
    let m = config.metrics;
    if m.syntactic && inputs.trees.is_none() {
        return Err(ReportError::Config("syntactic metrics need a tree sidecar".into()));
    }
    if m.semantic && inputs.providers.is_empty() {
        return Err(ReportError::Config(
            "semantic metrics need at least one embedding provider".into(),
        ));
    }
    let mut columns = Vec::new();
    if m.semantic {
        for p in inputs.providers {
            let col = semantic_column(p.model_name());
            if columns.contains(&col) {
                return Err(ReportError::Config(format!(
                    "provider {:?} configured twice",
                    p.model_name()
                )));
            }
            columns.push(col);
        }
    }
    if m.syntactic {
        columns.extend(SYNTACTIC_COLUMNS.map(String::from));
    }
    if m.lexical {
        columns.extend(LexicalScores::COLUMNS.map(String::from));
    }
    Ok(columns)
}

#[cfg(feature = "parallel")]
fn map_pairs<F>(pairs: &[SentencePair], threads: usize, f: F) -> Result<Vec<PairEval>, ReportError>
where
    F: Fn(&SentencePair) -> PairEval + Sync + Send,
{
    use rayon::prelude::*;
    if threads == 1 {
        return Ok(pairs.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ReportError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| pairs.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_pairs<F>(pairs: &[SentencePair], _threads: usize, f: F) -> Result<Vec<PairEval>, ReportError>
where
    F: Fn(&SentencePair) -> PairEval + Sync + Send,
{
    Ok(pairs.iter().map(f).collect())
}

fn group_name(pair: &SentencePair, by: GroupBy) -> String {
    match by {
        GroupBy::Origin => pair.origin.to_string(),
        GroupBy::All => "all".into(),
    }
}

pub fn evaluate_corpus(inputs: &EvalInputs<'_>, config: &EvalConfig) -> Result<Vec<SubsetReport>, ReportError> {
    evaluate_with_dump(inputs, config).map(|(r, _)| r)
}

/// Like [`evaluate_corpus`], also returning the per-pair values.
pub fn evaluate_with_dump(
    inputs: &EvalInputs<'_>,
    config: &EvalConfig,
) -> Result<(Vec<SubsetReport>, Vec<PairDump>), ReportError> {
    let columns = validate(config, inputs)?;
    let pairs = inputs.corpus.pairs();
    if config.metrics.semantic {
        for p in inputs.providers {
            if let Err(e) = p.warm(pairs) {
                if config.strict {
                    return Err(ReportError::Remote(format!("{}: {e}", p.model_name())));
                }
                warn!("prefetch for {} failed: {e}", p.model_name());
            }
        }
    }
    let plan = Plan {
        columns,
        inputs,
        config,
        profiler: LexicalProfiler::new(match &config.synonyms {
            Some(lex) => Meteor::with_synonyms(lex.clone()),
            None => Meteor::default(),
        }),
    };
    info!("scoring {} pairs over {} columns", pairs.len(), plan.columns.len());
    let evals = map_pairs(pairs, config.parallelism, |p| plan.eval(p))?;

    if config.strict {
        for (pair, ev) in pairs.iter().zip(&evals) {
            if let Some((col, Err(skip))) = plan.columns.iter().zip(&ev.values).find(|(_, v)| v.is_err()) {
                return Err(ReportError::Pair {
                    id: pair.id.clone(),
                    metric: col.clone(),
                    reason: skip.reason.clone(),
                    remote: skip.remote,
                });
            }
        }
    }

    let mut groups: BTreeMap<String, Vec<usize>> = config.subsets.iter().map(|s| (s.clone(), Vec::new())).collect();
    for (i, p) in pairs.iter().enumerate() {
        groups.entry(group_name(p, config.group_by)).or_default().push(i);
    }

    let reports = groups
        .into_iter()
        .map(|(name, idx)| reduce(&plan.columns, name, &idx, pairs, &evals))
        .collect();

    let dump = pairs
        .iter()
        .zip(&evals)
        .map(|(p, ev)| PairDump {
            id: p.id.clone(),
            subset: group_name(p, config.group_by),
            metrics: plan
                .columns
                .iter()
                .zip(&ev.values)
                .filter(|(c, _)| !POOLED_COLUMNS.contains(&c.as_str()))
                .filter_map(|(c, v)| v.as_ref().ok().map(|v| (c.clone(), *v)))
                .collect(),
        })
        .collect();
    Ok((reports, dump))
}

fn reduce(
    columns: &[String],
    subset: String,
    idx: &[usize],
    pairs: &[SentencePair],
    evals: &[PairEval],
) -> SubsetReport {
    let mut report = SubsetReport {
        subset,
        count: idx.len(),
        metrics: IndexMap::new(),
        skipped: IndexMap::new(),
        skip_reasons: IndexMap::new(),
    };
    if idx.is_empty() {
        return report;
    }
    for (c, col) in columns.iter().enumerate() {
        let mut sum = 0.0;
        let mut n = 0usize;
        let mut reasons = Vec::new();
        for &i in idx {
            match &evals[i].values[c] {
                Ok(v) => {
                    sum += v;
                    n += 1;
                }
                Err(skip) => reasons.push((pairs[i].id.clone(), skip.reason.clone())),
            }
        }
        if n > 0 {
            let value = match col.as_str() {
                "corpus_bleu" | "corpus_bleu2" => {
                    let stats = idx
                        .iter()
                        .filter_map(|&i| evals[i].bleu.as_ref())
                        .fold(BleuStats::default(), |acc, s| acc.merge(s));
                    let sm = if col == "corpus_bleu" {
                        Smoothing::None
                    } else {
                        Smoothing::Method1
                    };
                    1.0 - stats.bleu(sm)
                }
                _ => sum / n as f64,
            };
            report.metrics.insert(col.clone(), value);
        }
        report.skipped.insert(col.clone(), reasons.len());
        if !reasons.is_empty() {
            report.skip_reasons.insert(col.clone(), reasons);
        }
    }
    report
}

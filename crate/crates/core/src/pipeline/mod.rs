//! Corpus construction: moderation filtering, prompted paraphrase
//! generation, response parsing, pair pooling, deduplication and the
//! LLM judge.

mod generate;
mod judge;
mod moderation;
mod parse;
mod pool;
mod prompt;

pub use generate::{
    generate, read_generation_records, read_sources, write_generation_records, ChatModel, GenerateOptions,
    GenerationRecord, GenerationStatus, HttpChat, LlmConfig, SourceItem, LLM_KEY_VAR,
};
pub use judge::{
    build_judge_prompt, judge_pairs, parse_judge_response, JudgeOutcome, JudgeRatings, JUDGE_KEYS, JUDGE_TEMPLATE,
};
pub use moderation::{
    filter_offensive, FailurePolicy, FilterOutcome, HttpModerator, ModerationVerdict, Moderator, CATEGORIES,
};
pub use parse::{parse_numbered_list, render_numbered_list, ListError};
pub use pool::{dedupe_corpus, normalize, pool_corpus, pool_pairs};
pub use prompt::{build_prompt, PromptTemplate, PromptVariant, SOURCE_PLACEHOLDER};

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::http::HttpError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{0}: empty input")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("pool of {0} distinct sentence(s) yields no pairs")]
    DegeneratePool(usize),
    #[error("template: {0}")]
    Template(String),
    #[error("{id}: {source}")]
    Item {
        id: String,
        #[source]
        source: Box<PipelineError>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}

impl PipelineError {
    /// True when the failure came from a remote service.
    pub fn is_remote(&self) -> bool {
        match self {
            PipelineError::Http(_) | PipelineError::Malformed(_) => true,
            PipelineError::Item { source, .. } => source.is_remote(),
            _ => false,
        }
    }

    fn at(id: &str, e: PipelineError) -> Self {
        PipelineError::Item {
            id: id.to_string(),
            source: Box::new(e),
        }
    }
}

/// Applies `f` to every item on at most `workers` threads. Results come
/// back in input order.
pub(crate) fn map_bounded<T, R, F>(items: &[T], workers: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = workers.clamp(1, items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                let r = f(item);
                slots.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

use std::collections::HashMap;

use log::warn;
use serde::Serialize;
use serde_json::{json, Value};

use super::{map_bounded, PipelineError, LLM_KEY_VAR};
use crate::corpus::Corpus;
use crate::http::{ClientConfig, JsonClient};

pub const CATEGORIES: [&str; 11] = [
    "sexual",
    "hate",
    "harassment",
    "self-harm",
    "sexual/minors",
    "hate/threatening",
    "violence/graphic",
    "self-harm/instructions",
    "self-harm/intent",
    "harassment/threatening",
    "violence",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModerationVerdict {
    flags: [bool; CATEGORIES.len()],
}

impl ModerationVerdict {
    /// Reads the `categories` object of a moderation result. Every one of
    /// the eleven categories must be present as a boolean; extra keys are
    /// ignored.
    pub fn from_categories(categories: &Value) -> Result<Self, PipelineError> {
        let obj = categories
            .as_object()
            .ok_or_else(|| PipelineError::Malformed("categories is not an object".into()))?;
        let mut flags = [false; CATEGORIES.len()];
        for (flag, name) in flags.iter_mut().zip(CATEGORIES) {
            *flag = obj
                .get(name)
                .and_then(Value::as_bool)
                .ok_or_else(|| PipelineError::Malformed(format!("missing category {name:?}")))?;
        }
        Ok(ModerationVerdict { flags })
    }

    pub fn from_flagged(names: &[&str]) -> Self {
        let mut v = ModerationVerdict::default();
        for (flag, name) in v.flags.iter_mut().zip(CATEGORIES) {
            *flag = names.contains(&name);
        }
        v
    }

    pub fn flag(&self, category: &str) -> Option<bool> {
        CATEGORIES.iter().position(|c| *c == category).map(|i| self.flags[i])
    }

    pub fn flagged(&self) -> Vec<&'static str> {
        CATEGORIES
            .iter()
            .zip(self.flags)
            .filter_map(|(c, f)| f.then_some(*c))
            .collect()
    }

    pub fn is_flagged(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }
}

pub trait Moderator: Send + Sync {
    fn moderate(&self, text: &str) -> Result<ModerationVerdict, PipelineError>;
}

#[derive(Debug)]
pub struct HttpModerator {
    endpoint: String,
    client: JsonClient,
}

impl HttpModerator {
    pub fn new(endpoint: impl Into<String>, config: &ClientConfig) -> Result<Self, PipelineError> {
        Ok(HttpModerator {
            endpoint: endpoint.into(),
            client: JsonClient::with_env_key(config, LLM_KEY_VAR)?,
        })
    }
}

impl Moderator for HttpModerator {
    fn moderate(&self, text: &str) -> Result<ModerationVerdict, PipelineError> {
        let reply = self.client.post_json(&self.endpoint, &json!({ "input": text }))?;
        let categories = reply
            .pointer("/results/0/categories")
            .ok_or_else(|| PipelineError::Malformed("missing results[0].categories".into()))?;
        ModerationVerdict::from_categories(categories)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    /// Record the failure and leave the pair out of both lists.
    #[default]
    Skip,
    /// Abort the run on the first failure.
    Strict,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FilterOutcome {
    #[serde(skip)]
    pub kept: Corpus,
    /// `(pair id, flagged categories)`
    pub dropped: Vec<(String, Vec<String>)>,
    /// `(pair id, error)` for pairs whose source could not be moderated.
    pub failed: Vec<(String, String)>,
}

/// Moderates each distinct source text once and drops every pair whose
/// source is flagged in any category.
pub fn filter_offensive(
    corpus: &Corpus,
    moderator: &dyn Moderator,
    policy: FailurePolicy,
    max_in_flight: usize,
) -> Result<FilterOutcome, PipelineError> {
    let mut texts: Vec<&str> = Vec::new();
    let mut slot: HashMap<&str, usize> = HashMap::new();
    for p in corpus {
        slot.entry(p.source_text.as_str()).or_insert_with(|| {
            texts.push(&p.source_text);
            texts.len() - 1
        });
    }
    let mut verdicts = map_bounded(&texts, max_in_flight, |t| moderator.moderate(t));

    if policy == FailurePolicy::Strict {
        if let Some(p) = corpus.iter().find(|p| verdicts[slot[p.source_text.as_str()]].is_err()) {
            let i = slot[p.source_text.as_str()];
            let e = std::mem::replace(&mut verdicts[i], Ok(ModerationVerdict::default())).unwrap_err();
            return Err(PipelineError::at(&p.id, e));
        }
    }

    let mut out = FilterOutcome::default();
    for p in corpus {
        match &verdicts[slot[p.source_text.as_str()]] {
            Ok(v) if v.is_flagged() => out
                .dropped
                .push((p.id.clone(), v.flagged().into_iter().map(String::from).collect())),
            Ok(_) => out.kept.push(p.clone())?,
            Err(e) => {
                warn!("moderation failed for {}: {e}", p.id);
                out.failed.push((p.id.clone(), e.to_string()));
            }
        }
    }
    Ok(out)
}

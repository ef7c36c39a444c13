use std::io::{BufRead, BufReader, Read, Write};

use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{map_bounded, parse_numbered_list, ListError, Moderator, PipelineError, PromptTemplate};
use crate::corpus::{CorpusError, OriginTag};
use crate::http::{ClientConfig, JsonClient};

pub const LLM_KEY_VAR: &str = "PARAFUSE_LLM_KEY";

/// A source sentence awaiting paraphrases. Read from JSONL as
/// `{"id", "text", "origin"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceItem {
    pub id: String,
    pub text: String,
    pub origin: OriginTag,
}

pub fn read_sources<R: Read>(reader: R) -> Result<Vec<SourceItem>, CorpusError> {
    read_jsonl(reader)
}

fn read_jsonl<T: for<'de> Deserialize<'de>, R: Read>(reader: R) -> Result<Vec<T>, CorpusError> {
    let mut out = Vec::new();
    for (n, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
            line: n + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenerationStatus {
    Ok,
    NonEnglish,
    ParseFailed,
    ModerationBlocked,
    /// The model could not be reached; see `error`.
    RequestFailed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub source_id: String,
    pub source_text: String,
    pub origin: OriginTag,
    pub prompt_text: String,
    pub raw_response: String,
    pub parsed_paraphrases: Vec<String>,
    pub status: GenerationStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn write_generation_records<W: Write>(mut w: W, records: &[GenerationRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_generation_records<R: Read>(reader: R) -> Result<Vec<GenerationRecord>, CorpusError> {
    read_jsonl(reader)
}

pub trait ChatModel: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, PipelineError>;
}

#[derive(Debug, Clone)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub client: ClientConfig,
}

impl LlmConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        LlmConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            temperature: 0.0,
            client: ClientConfig::default(),
        }
    }
}

/// OpenAI-compatible chat completions client.
#[derive(Debug)]
pub struct HttpChat {
    config: LlmConfig,
    client: JsonClient,
}

impl HttpChat {
    pub fn new(config: LlmConfig) -> Result<Self, PipelineError> {
        let client = JsonClient::with_env_key(&config.client, LLM_KEY_VAR)?;
        Ok(HttpChat { config, client })
    }
}

impl ChatModel for HttpChat {
    fn complete(&self, prompt: &str) -> Result<String, PipelineError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let reply = self.client.post_json(&self.config.endpoint, &body)?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| PipelineError::Malformed("missing choices[0].message.content".into()))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GenerateOptions {
    pub max_in_flight: usize,
    /// Abort on the first remote failure instead of recording it.
    pub strict: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            max_in_flight: 4,
            strict: false,
        }
    }
}

fn generate_one(
    src: &SourceItem,
    chat: &dyn ChatModel,
    template: &PromptTemplate,
    moderator: Option<&dyn Moderator>,
) -> Result<GenerationRecord, PipelineError> {
    let mut rec = GenerationRecord {
        source_id: src.id.clone(),
        source_text: src.text.clone(),
        origin: src.origin.clone(),
        prompt_text: template.render(&src.text)?,
        raw_response: String::new(),
        parsed_paraphrases: Vec::new(),
        status: GenerationStatus::Ok,
        error: None,
    };
    if let Some(m) = moderator {
        let verdict = m.moderate(&src.text)?;
        if verdict.is_flagged() {
            rec.status = GenerationStatus::ModerationBlocked;
            rec.error = Some(verdict.flagged().join(","));
            return Ok(rec);
        }
    }
    rec.raw_response = chat.complete(&rec.prompt_text)?;
    match parse_numbered_list(&rec.raw_response) {
        Ok(items) => rec.parsed_paraphrases = items.into_iter().take(5).collect(),
        Err(ListError::NonEnglish) => rec.status = GenerationStatus::NonEnglish,
        Err(ListError::NoItems) => rec.status = GenerationStatus::ParseFailed,
    }
    Ok(rec)
}

/// One record per source, in input order.
pub fn generate(
    sources: &[SourceItem],
    chat: &dyn ChatModel,
    template: &PromptTemplate,
    moderator: Option<&dyn Moderator>,
    opts: GenerateOptions,
) -> Result<Vec<GenerationRecord>, PipelineError> {
    let results = map_bounded(sources, opts.max_in_flight, |s| {
        generate_one(s, chat, template, moderator)
    });
    let mut out = Vec::with_capacity(results.len());
    for (src, r) in sources.iter().zip(results) {
        match r {
            Ok(rec) => out.push(rec),
            Err(e) if !e.is_remote() || opts.strict => return Err(PipelineError::at(&src.id, e)),
            Err(e) => {
                warn!("{}: {e}", src.id);
                out.push(GenerationRecord {
                    source_id: src.id.clone(),
                    source_text: src.text.clone(),
                    origin: src.origin.clone(),
                    prompt_text: template.render(&src.text)?,
                    raw_response: String::new(),
                    parsed_paraphrases: Vec::new(),
                    status: GenerationStatus::RequestFailed,
                    error: Some(e.to_string()),
                });
            }
        }
    }
    let ok = out.iter().filter(|r| r.status == GenerationStatus::Ok).count();
    info!("generated paraphrases for {ok} of {} sources", out.len());
    Ok(out)
}

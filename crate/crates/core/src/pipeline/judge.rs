use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::prompt::fill;
use super::{map_bounded, ChatModel, PipelineError};
use crate::corpus::Corpus;

pub const JUDGE_TEMPLATE: &str = include_str!("../../templates/judge.txt");

/// Rating keys in the order the rubric lists them.
pub const JUDGE_KEYS: [&str; 4] = [
    "Semantic Similarity",
    "Lexical Diversity",
    "Syntactic Diversity",
    "Grammatical Correctness",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeRatings {
    pub semantic_similarity: u8,
    pub lexical_diversity: u8,
    pub syntactic_diversity: u8,
    pub grammatical_correctness: u8,
}

impl JudgeRatings {
    pub fn as_array(&self) -> [u8; 4] {
        [
            self.semantic_similarity,
            self.lexical_diversity,
            self.syntactic_diversity,
            self.grammatical_correctness,
        ]
    }

    /// The ratings as the JSON object the rubric asks the judge to emit.
    pub fn to_response_json(&self) -> String {
        let obj: Map<String, Value> = JUDGE_KEYS
            .iter()
            .zip(self.as_array())
            .map(|(k, v)| (k.to_string(), Value::from(v)))
            .collect();
        Value::Object(obj).to_string()
    }
}

pub fn build_judge_prompt(source: &str, paraphrase: &str) -> Result<String, PipelineError> {
    if source.trim().is_empty() {
        return Err(PipelineError::EmptyInput("judge source"));
    }
    if paraphrase.trim().is_empty() {
        return Err(PipelineError::EmptyInput("judge paraphrase"));
    }
    Ok(fill(
        JUDGE_TEMPLATE.trim_end(),
        &[("$source_text", source), ("$paraphrase", paraphrase)],
    ))
}

fn first_object(raw: &str) -> Option<Map<String, Value>> {
    raw.match_indices('{').find_map(|(i, _)| {
        let mut stream = serde_json::Deserializer::from_str(&raw[i..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(Value::Object(m))) => Some(m),
            _ => None,
        }
    })
}

/// Ratings from the first JSON object in `raw`. Each of the four keys must
/// hold an integer from 1 to 5.
pub fn parse_judge_response(raw: &str) -> Result<JudgeRatings, PipelineError> {
    let obj = first_object(raw).ok_or_else(|| PipelineError::Malformed("no JSON object in judge reply".into()))?;
    let mut r = [0u8; 4];
    for (slot, key) in r.iter_mut().zip(JUDGE_KEYS) {
        let v = obj
            .get(key)
            .ok_or_else(|| PipelineError::Malformed(format!("missing rating {key:?}")))?;
        *slot = match v.as_u64() {
            Some(n @ 1..=5) => n as u8,
            Some(n) => return Err(PipelineError::Malformed(format!("{key:?} rating {n} outside 1..=5"))),
            None => {
                return Err(PipelineError::Malformed(format!(
                    "{key:?} rating {v} is not an integer"
                )))
            }
        };
    }
    Ok(JudgeRatings {
        semantic_similarity: r[0],
        lexical_diversity: r[1],
        syntactic_diversity: r[2],
        grammatical_correctness: r[3],
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JudgeOutcome {
    pub id: String,
    pub ratings: Option<JudgeRatings>,
    pub raw_response: String,
    pub error: Option<String>,
}

/// Rates every pair of `corpus`. Unparseable replies are kept with their
/// error; in strict mode any remote failure aborts.
pub fn judge_pairs(
    corpus: &Corpus,
    chat: &dyn ChatModel,
    max_in_flight: usize,
    strict: bool,
) -> Result<Vec<JudgeOutcome>, PipelineError> {
    let results = map_bounded(corpus.pairs(), max_in_flight, |p| {
        let prompt = build_judge_prompt(&p.source_text, &p.paraphrase_text)?;
        chat.complete(&prompt)
    });
    let mut out = Vec::with_capacity(results.len());
    for (p, r) in corpus.iter().zip(results) {
        let outcome = match r {
            Ok(raw) => match parse_judge_response(&raw) {
                Ok(ratings) => JudgeOutcome {
                    id: p.id.clone(),
                    ratings: Some(ratings),
                    raw_response: raw,
                    error: None,
                },
                Err(e) => JudgeOutcome {
                    id: p.id.clone(),
                    ratings: None,
                    raw_response: raw,
                    error: Some(e.to_string()),
                },
            },
            Err(e) if strict || !e.is_remote() => return Err(PipelineError::at(&p.id, e)),
            Err(e) => JudgeOutcome {
                id: p.id.clone(),
                ratings: None,
                raw_response: String::new(),
                error: Some(e.to_string()),
            },
        };
        out.push(outcome);
    }
    Ok(out)
}

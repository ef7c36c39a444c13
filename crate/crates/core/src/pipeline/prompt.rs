use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::PipelineError;

pub const SOURCE_PLACEHOLDER: &str = "$Source Sentence";

const PLAIN: &str = include_str!("../../templates/paraphrase_plain.txt");
const ENGLISH_GUARD: &str = include_str!("../../templates/paraphrase_english_guard.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptVariant {
    Plain,
    EnglishGuard,
}

impl FromStr for PromptVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" => Ok(PromptVariant::Plain),
            "english_guard" | "english-guard" => Ok(PromptVariant::EnglishGuard),
            other => Err(format!("unknown prompt variant {other:?}")),
        }
    }
}

impl fmt::Display for PromptVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PromptVariant::Plain => "plain",
            PromptVariant::EnglishGuard => "english_guard",
        })
    }
}

/// Fills `$name` placeholders in a single left-to-right pass, so values
/// that happen to contain placeholder text are left alone.
pub(crate) fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    'scan: while let Some(pos) = rest.find('$') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        for (name, value) in vars {
            if let Some(after) = tail.strip_prefix(name) {
                out.push_str(value);
                rest = after;
                continue 'scan;
            }
        }
        out.push('$');
        rest = &tail[1..];
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    name: String,
    text: String,
}

impl PromptTemplate {
    pub fn builtin(variant: PromptVariant) -> Self {
        let text = match variant {
            PromptVariant::Plain => PLAIN,
            PromptVariant::EnglishGuard => ENGLISH_GUARD,
        };
        PromptTemplate {
            name: variant.to_string(),
            text: text.trim_end().to_string(),
        }
    }

    /// A user-supplied template; it must contain `$Source Sentence`.
    pub fn new(name: impl Into<String>, text: &str) -> Result<Self, PipelineError> {
        let text = text.trim_end();
        if !text.contains(SOURCE_PLACEHOLDER) {
            return Err(PipelineError::Template(format!(
                "missing {SOURCE_PLACEHOLDER} placeholder"
            )));
        }
        Ok(PromptTemplate {
            name: name.into(),
            text: text.to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        Self::new(name, &fs::read_to_string(path)?)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn render(&self, source: &str) -> Result<String, PipelineError> {
        if source.trim().is_empty() {
            return Err(PipelineError::EmptyInput("prompt source"));
        }
        Ok(fill(&self.text, &[(SOURCE_PLACEHOLDER, source)]))
    }
}

pub fn build_prompt(source: &str, variant: PromptVariant) -> Result<String, PipelineError> {
    PromptTemplate::builtin(variant).render(source)
}

//! Corpus-wide evaluation and report rendering.
//!
//! Per-pair scores are computed independently (optionally on a rayon pool)
//! and then reduced in input order, so the output does not depend on the
//! degree of parallelism.

mod evaluate;
mod render;

pub use evaluate::{evaluate_corpus, evaluate_with_dump, EvalInputs, PairDump};
pub use render::{format_cell, render_report, write_pair_dump};

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::lexical::SynonymLexicon;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("pair {id:?}, {metric}: {reason}")]
    Pair {
        id: String,
        metric: String,
        reason: String,
        remote: bool,
    },
    #[error("remote service: {0}")]
    Remote(String),
    #[error("nothing to render")]
    Empty,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl ReportError {
    pub fn is_remote(&self) -> bool {
        matches!(self, ReportError::Remote(_) | ReportError::Pair { remote: true, .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricSet {
    pub semantic: bool,
    pub syntactic: bool,
    pub lexical: bool,
}

impl MetricSet {
    pub const ALL: MetricSet = MetricSet {
        semantic: true,
        syntactic: true,
        lexical: true,
    };
    pub const LEXICAL: MetricSet = MetricSet {
        semantic: false,
        syntactic: false,
        lexical: true,
    };
}

impl FromStr for MetricSet {
    type Err = String;

    /// Comma-separated families, e.g. `lexical,syntactic`, or `all`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut set = MetricSet {
            semantic: false,
            syntactic: false,
            lexical: false,
        };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "semantic" => set.semantic = true,
                "syntactic" => set.syntactic = true,
                "lexical" => set.lexical = true,
                "all" => set = MetricSet::ALL,
                other => return Err(format!("unknown metric family {other:?}")),
            }
        }
        if set
            == (MetricSet {
                semantic: false,
                syntactic: false,
                lexical: false,
            })
        {
            return Err("no metric family selected".into());
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    Csv,
    #[default]
    Json,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
            OutputFormat::Markdown => "markdown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GroupBy {
    #[default]
    Origin,
    /// A single subset named `all`.
    All,
}

impl FromStr for GroupBy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "origin" => Ok(GroupBy::Origin),
            "all" | "none" => Ok(GroupBy::All),
            other => Err(format!("unknown group-by key {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub metrics: MetricSet,
    pub format: OutputFormat,
    pub group_by: GroupBy,
    /// Worker threads; 0 uses every available core.
    pub parallelism: usize,
    /// Fail on the first pair that cannot be scored instead of skipping it.
    pub strict: bool,
    /// Subset names reported even when no pair falls into them.
    pub subsets: Vec<String>,
    pub synonyms: Option<SynonymLexicon>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            metrics: MetricSet::ALL,
            format: OutputFormat::Json,
            group_by: GroupBy::Origin,
            parallelism: 0,
            strict: false,
            subsets: Vec::new(),
            synonyms: None,
        }
    }
}

/// Columns computed per group rather than averaged over pairs.
pub const POOLED_COLUMNS: [&str; 2] = ["corpus_bleu", "corpus_bleu2"];

pub const SYNTACTIC_COLUMNS: [&str; 4] = ["ted_f", "ted_3", "st_kernel", "np_kernel"];

/// Columns shown as plain numbers rather than percentages.
pub const COUNT_COLUMNS: [&str; 2] = ["ted_f", "ted_3"];

pub fn semantic_column(model: &str) -> String {
    format!("semantic.{model}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    pub subset: String,
    pub count: usize,
    pub metrics: IndexMap<String, f64>,
    pub skipped: IndexMap<String, usize>,
    /// `(pair id, reason)` for each skipped pair, per metric.
    #[serde(skip)]
    pub skip_reasons: IndexMap<String, Vec<(String, String)>>,
}

//! Tokenization and lexical diversity scores.
//!
//! Similarity metrics are reported in diversity orientation (`1 - score`);
//! edit rates (TER, WER, CER) are reported as-is. The source sentence is
//! always the reference and the paraphrase the hypothesis.

mod bleu;
mod edit;
mod meteor;
mod overlap;
mod rouge;
mod ter;
mod tokenize;

pub use bleu::{corpus_bleu, google_bleu, sentence_bleu, BleuStats, Smoothing, MAX_ORDER, METHOD1_EPSILON};
pub use edit::{cer, levenshtein, wer};
pub use meteor::{meteor, Meteor, SynonymLexicon};
pub use overlap::{bow_overlap, token_jaccard};
pub use rouge::{rouge, RougeVariant};
pub use ter::{ter, ter_counts, TerCounts};
pub use tokenize::{tokenize, TokenSeq};

use serde::Serialize;
use thiserror::Error;

use crate::corpus::SentencePair;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexicalError {
    #[error("{0}: empty token sequence")]
    EmptyInput(&'static str),
    #[error("{0}: empty reference")]
    EmptyReference(&'static str),
    #[error("pair {id:?}: {source}")]
    Pair {
        id: String,
        #[source]
        source: Box<LexicalError>,
    },
}

/// Per-pair lexical scores. `corpus_bleu` and `corpus_bleu2` hold the
/// sentence-level values here; corpus pooling happens at aggregation time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LexicalScores {
    pub bow_overlap: f64,
    pub corpus_bleu: f64,
    pub corpus_bleu2: f64,
    pub sentence_bleu: f64,
    pub meteor: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub token_jaccard: f64,
    pub ter: f64,
    pub wer: f64,
    pub cer: f64,
    pub google_bleu: f64,
}

impl LexicalScores {
    /// Field names in report column order.
    pub const COLUMNS: [&'static str; 13] = [
        "bow_overlap",
        "corpus_bleu",
        "corpus_bleu2",
        "sentence_bleu",
        "meteor",
        "rouge1",
        "rouge2",
        "rougeL",
        "token_jaccard",
        "ter",
        "wer",
        "cer",
        "google_bleu",
    ];

    /// `(name, value)` in report column order.
    pub fn named(&self) -> [(&'static str, f64); 13] {
        let v = [
            self.bow_overlap,
            self.corpus_bleu,
            self.corpus_bleu2,
            self.sentence_bleu,
            self.meteor,
            self.rouge1,
            self.rouge2,
            self.rouge_l,
            self.token_jaccard,
            self.ter,
            self.wer,
            self.cer,
            self.google_bleu,
        ];
        std::array::from_fn(|i| (Self::COLUMNS[i], v[i]))
    }
}

/// Computes [`LexicalScores`] with a configurable METEOR matcher.
#[derive(Debug, Default)]
pub struct LexicalProfiler {
    meteor: Meteor,
}

impl LexicalProfiler {
    pub fn new(meteor: Meteor) -> Self {
        LexicalProfiler { meteor }
    }

    pub fn profile_texts(&self, source: &str, paraphrase: &str) -> Result<LexicalScores, LexicalError> {
        let r = tokenize(source);
        let h = tokenize(paraphrase);
        let stats = BleuStats::from_pair(&r, &h);
        if r.is_empty() || h.is_empty() {
            return Err(LexicalError::EmptyInput("lexical_profile"));
        }
        let bleu_none = 1.0 - stats.bleu(Smoothing::None);
        let bleu_m1 = 1.0 - stats.bleu(Smoothing::Method1);
        Ok(LexicalScores {
            bow_overlap: bow_overlap(&r, &h)?,
            corpus_bleu: bleu_none,
            corpus_bleu2: bleu_m1,
            sentence_bleu: bleu_m1,
            meteor: self.meteor.score(&r, &h)?,
            rouge1: rouge(&r, &h, RougeVariant::R1)?,
            rouge2: rouge(&r, &h, RougeVariant::R2)?,
            rouge_l: rouge(&r, &h, RougeVariant::RL)?,
            token_jaccard: token_jaccard(&r, &h)?,
            ter: ter(&r, &h)?,
            wer: wer(&r, &h)?,
            cer: cer(source, paraphrase)?,
            google_bleu: google_bleu(&r, &h)?,
        })
    }

    pub fn profile(&self, pair: &SentencePair) -> Result<LexicalScores, LexicalError> {
        self.profile_texts(&pair.source_text, &pair.paraphrase_text)
            .map_err(|e| LexicalError::Pair {
                id: pair.id.clone(),
                source: Box::new(e),
            })
    }
}

pub fn lexical_profile(pair: &SentencePair) -> Result<LexicalScores, LexicalError> {
    LexicalProfiler::default().profile(pair)
}

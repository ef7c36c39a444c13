//! METEOR with exact, stem and optional synonym matching stages.
//!
//! Alignment is greedy per stage, scanning hypothesis and reference words
//! from the end, which is how the widely used NLTK implementation aligns.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

use super::{LexicalError, TokenSeq};

pub const ALPHA: f64 = 0.9;
pub const BETA: f64 = 3.0;
pub const GAMMA: f64 = 0.5;

/// Word → synonym groups it belongs to. One group per line in the source
/// file, words separated by whitespace or commas, `#` starts a comment.
#[derive(Debug, Clone, Default)]
pub struct SynonymLexicon {
    groups: Vec<Vec<String>>,
    index: HashMap<String, Vec<usize>>,
}

impl SynonymLexicon {
    pub fn parse(text: &str) -> Self {
        let mut lex = SynonymLexicon::default();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("");
            let words: Vec<String> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|w| !w.is_empty())
                .map(str::to_lowercase)
                .collect();
            if words.len() < 2 {
                continue;
            }
            let id = lex.groups.len();
            for w in &words {
                lex.index.entry(w.clone()).or_default().push(id);
            }
            lex.groups.push(words);
        }
        lex
    }

    pub fn load(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self::parse(&fs::read_to_string(path)?))
    }

    fn synonyms_of<'a>(&'a self, word: &'a str) -> HashSet<&'a str> {
        let mut out: HashSet<&str> = HashSet::from([word]);
        if let Some(ids) = self.index.get(word) {
            for &id in ids {
                out.extend(self.groups[id].iter().map(String::as_str));
            }
        }
        out
    }
}

pub struct Meteor {
    stemmer: Stemmer,
    synonyms: Option<SynonymLexicon>,
}

impl Default for Meteor {
    fn default() -> Self {
        Meteor {
            stemmer: Stemmer::create(Algorithm::English),
            synonyms: None,
        }
    }
}

impl std::fmt::Debug for Meteor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Meteor")
            .field("synonyms", &self.synonyms.as_ref().map(|s| s.groups.len()))
            .finish()
    }
}

/// Remaining (original index, word) entries for one side.
type Enum = Vec<(usize, String)>;

fn match_stage(hyp: &mut Enum, reference: &mut Enum, same: impl Fn(&str, &str) -> bool, out: &mut Vec<(usize, usize)>) {
    for i in (0..hyp.len()).rev() {
        for j in (0..reference.len()).rev() {
            if same(&hyp[i].1, &reference[j].1) {
                out.push((hyp[i].0, reference[j].0));
                hyp.remove(i);
                reference.remove(j);
                break;
            }
        }
    }
}

impl Meteor {
    pub fn with_synonyms(lexicon: SynonymLexicon) -> Self {
        Meteor {
            synonyms: Some(lexicon),
            ..Default::default()
        }
    }

    pub fn stem<'a>(&self, word: &'a str) -> std::borrow::Cow<'a, str> {
        self.stemmer.stem(word)
    }

    /// Word alignment as `(hyp index, ref index)` pairs sorted by hypothesis
    /// position.
    pub fn align(&self, reference: &[String], hyp: &[String]) -> Vec<(usize, usize)> {
        let mut h: Enum = hyp.iter().cloned().enumerate().collect();
        let mut r: Enum = reference.iter().cloned().enumerate().collect();
        let mut matches = Vec::new();

        match_stage(&mut h, &mut r, |a, b| a == b, &mut matches);

        let mut hs: Enum = h.iter().map(|(i, w)| (*i, self.stem(w).into_owned())).collect();
        let mut rs: Enum = r.iter().map(|(i, w)| (*i, self.stem(w).into_owned())).collect();
        let before = matches.len();
        match_stage(&mut hs, &mut rs, |a, b| a == b, &mut matches);
        if let Some(lex) = &self.synonyms {
            // stage three works on surface forms of the still-unmatched words
            let used_h: HashSet<usize> = matches[before..].iter().map(|m| m.0).collect();
            let used_r: HashSet<usize> = matches[before..].iter().map(|m| m.1).collect();
            h.retain(|(i, _)| !used_h.contains(i));
            r.retain(|(i, _)| !used_r.contains(i));
            match_stage(&mut h, &mut r, |hw, rw| lex.synonyms_of(hw).contains(rw), &mut matches);
        }
        matches.sort_by_key(|m| m.0);
        matches
    }

    /// METEOR similarity in `[0, 1]`.
    pub fn similarity(&self, reference: &[String], hyp: &[String]) -> f64 {
        let matches = self.align(reference, hyp);
        let m = matches.len();
        if m == 0 || hyp.is_empty() || reference.is_empty() {
            return 0.0;
        }
        let precision = m as f64 / hyp.len() as f64;
        let recall = m as f64 / reference.len() as f64;
        let fmean = precision * recall / (ALPHA * precision + (1.0 - ALPHA) * recall);
        let mut chunks = 1;
        for w in matches.windows(2) {
            if !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1) {
                chunks += 1;
            }
        }
        let frag = chunks as f64 / m as f64;
        (1.0 - GAMMA * frag.powf(BETA)) * fmean
    }

    /// `1 - METEOR`.
    pub fn score(&self, reference: &TokenSeq, hyp: &TokenSeq) -> Result<f64, LexicalError> {
        if reference.is_empty() || hyp.is_empty() {
            return Err(LexicalError::EmptyInput("meteor"));
        }
        Ok(1.0 - self.similarity(reference, hyp))
    }
}

fn default_meteor() -> &'static Meteor {
    static INSTANCE: OnceLock<Meteor> = OnceLock::new();
    INSTANCE.get_or_init(Meteor::default)
}

/// `1 - METEOR` with exact and stem matching only.
pub fn meteor(reference: &TokenSeq, hyp: &TokenSeq) -> Result<f64, LexicalError> {
    default_meteor().score(reference, hyp)
}

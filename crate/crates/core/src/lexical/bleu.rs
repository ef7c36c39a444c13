//! BLEU with optional add-epsilon smoothing, and Google BLEU (GLEU).
//!
//! Counting follows the common toolkit convention: clipped n-gram matches
//! over hypothesis n-gram totals, with each sentence's total floored at 1
//! before corpus-level summation.

use std::collections::HashMap;
use std::str::FromStr;

use super::{LexicalError, TokenSeq};

pub const MAX_ORDER: usize = 4;

/// Replacement numerator for zero n-gram matches under [`Smoothing::Method1`].
pub const METHOD1_EPSILON: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothing {
    None,
    Method1,
}

impl FromStr for Smoothing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Smoothing::None),
            "method1" => Ok(Smoothing::Method1),
            other => Err(format!("unknown smoothing {other:?}")),
        }
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut map = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *map.entry(w).or_insert(0) += 1;
        }
    }
    map
}

/// Sufficient statistics for corpus BLEU. Merging is associative and
/// commutative, so partitions can be reduced in any grouping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn from_pair(reference: &TokenSeq, hyp: &TokenSeq) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len(),
            ref_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            let clipped: usize = h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum();
            let total: usize = h.values().sum();
            stats.matches[n - 1] = clipped;
            stats.totals[n - 1] = total.max(1);
        }
        stats
    }

    pub fn merge(mut self, other: &BleuStats) -> BleuStats {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self
    }

    pub fn brevity_penalty(&self) -> f64 {
        if self.hyp_len > self.ref_len {
            1.0
        } else if self.hyp_len == 0 {
            0.0
        } else {
            (1.0 - self.ref_len as f64 / self.hyp_len as f64).exp()
        }
    }

    /// BLEU in `[0, 1]` (similarity orientation).
    pub fn bleu(&self, smoothing: Smoothing) -> f64 {
        if self.matches[0] == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        for n in 0..MAX_ORDER {
            let num = match (self.matches[n], smoothing) {
                (0, Smoothing::None) => return 0.0,
                (0, Smoothing::Method1) => METHOD1_EPSILON,
                (m, _) => m as f64,
            };
            log_sum += (num / self.totals[n] as f64).ln();
        }
        self.brevity_penalty() * (log_sum / MAX_ORDER as f64).exp()
    }
}

fn check_pair(reference: &TokenSeq, hyp: &TokenSeq, metric: &'static str) -> Result<(), LexicalError> {
    if reference.is_empty() || hyp.is_empty() {
        Err(LexicalError::EmptyInput(metric))
    } else {
        Ok(())
    }
}

/// `1 - BLEU` for one sentence pair.
pub fn sentence_bleu(reference: &TokenSeq, hyp: &TokenSeq, smoothing: Smoothing) -> Result<f64, LexicalError> {
    check_pair(reference, hyp, "sentence_bleu")?;
    Ok(1.0 - BleuStats::from_pair(reference, hyp).bleu(smoothing))
}

/// `1 - BLEU` with counts pooled over all pairs before taking precisions.
pub fn corpus_bleu(pairs: &[(TokenSeq, TokenSeq)], smoothing: Smoothing) -> Result<f64, LexicalError> {
    if pairs.is_empty() {
        return Err(LexicalError::EmptyInput("corpus_bleu"));
    }
    let mut stats = BleuStats::default();
    for (r, h) in pairs {
        check_pair(r, h, "corpus_bleu")?;
        stats = stats.merge(&BleuStats::from_pair(r, h));
    }
    Ok(1.0 - stats.bleu(smoothing))
}

/// `1 - GLEU`, where GLEU is the minimum of n-gram precision and recall
/// with counts summed over orders 1 to 4.
pub fn google_bleu(reference: &TokenSeq, hyp: &TokenSeq) -> Result<f64, LexicalError> {
    check_pair(reference, hyp, "google_bleu")?;
    let mut matches = 0usize;
    let mut hyp_total = 0usize;
    let mut ref_total = 0usize;
    for n in 1..=MAX_ORDER {
        let h = ngram_counts(hyp, n);
        let r = ngram_counts(reference, n);
        matches += h
            .iter()
            .map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0)))
            .sum::<usize>();
        hyp_total += h.values().sum::<usize>();
        ref_total += r.values().sum::<usize>();
    }
    Ok(1.0 - matches as f64 / hyp_total.max(ref_total) as f64)
}

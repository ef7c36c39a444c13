use std::collections::HashMap;
use std::str::FromStr;

use super::{LexicalError, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RougeVariant {
    R1,
    R2,
    RL,
}

impl FromStr for RougeVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "r1" | "rouge1" => Ok(RougeVariant::R1),
            "r2" | "rouge2" => Ok(RougeVariant::R2),
            "rl" | "rougel" => Ok(RougeVariant::RL),
            other => Err(format!("unknown rouge variant {other:?}")),
        }
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ngrams(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

fn ngram_f1(reference: &[String], hyp: &[String], n: usize) -> f64 {
    let r = ngrams(reference, n);
    let h = ngrams(hyp, n);
    let overlap: usize = r.iter().map(|(g, c)| (*c).min(h.get(g).copied().unwrap_or(0))).sum();
    let r_total: usize = r.values().sum();
    let h_total: usize = h.values().sum();
    f1(
        overlap as f64 / h_total.max(1) as f64,
        overlap as f64 / r_total.max(1) as f64,
    )
}

pub(crate) fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(curr[j]) };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// `1 - F1` for ROUGE-1, ROUGE-2 or ROUGE-L.
pub fn rouge(reference: &TokenSeq, hyp: &TokenSeq, variant: RougeVariant) -> Result<f64, LexicalError> {
    if reference.is_empty() || hyp.is_empty() {
        return Err(LexicalError::EmptyInput("rouge"));
    }
    let score = match variant {
        RougeVariant::R1 => ngram_f1(reference, hyp, 1),
        RougeVariant::R2 => ngram_f1(reference, hyp, 2),
        RougeVariant::RL => {
            let lcs = lcs_len(reference, hyp) as f64;
            f1(lcs / hyp.len() as f64, lcs / reference.len() as f64)
        }
    };
    Ok(1.0 - score)
}

use super::{LexicalError, TokenSeq};

/// Unit-cost Levenshtein distance over arbitrary symbols.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=a.len()).collect();
    let mut curr = vec![0usize; a.len() + 1];
    for (j, bj) in b.iter().enumerate() {
        curr[0] = j + 1;
        for (i, ai) in a.iter().enumerate() {
            let sub = prev[i] + usize::from(ai != bj);
            curr[i + 1] = sub.min(prev[i + 1] + 1).min(curr[i] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[a.len()]
}

/// Word error rate of `hyp` against `reference`; may exceed 1.
pub fn wer(reference: &TokenSeq, hyp: &TokenSeq) -> Result<f64, LexicalError> {
    if reference.is_empty() {
        return Err(LexicalError::EmptyReference("wer"));
    }
    Ok(levenshtein(reference.tokens(), hyp.tokens()) as f64 / reference.len() as f64)
}

/// Character edit rate on lowercased, trimmed text.
pub fn cer(reference: &str, hyp: &str) -> Result<f64, LexicalError> {
    let r: Vec<char> = reference.trim().to_lowercase().chars().collect();
    let h: Vec<char> = hyp.trim().to_lowercase().chars().collect();
    if r.is_empty() {
        return Err(LexicalError::EmptyReference("cer"));
    }
    Ok(levenshtein(&r, &h) as f64 / r.len() as f64)
}

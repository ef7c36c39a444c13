use std::collections::{HashMap, HashSet};

use super::{LexicalError, TokenSeq};

fn counts(tokens: &[String]) -> HashMap<&str, usize> {
    let mut map = HashMap::new();
    for t in tokens {
        *map.entry(t.as_str()).or_insert(0) += 1;
    }
    map
}

/// `1 - |multiset intersection| / max(|src|, |par|)`.
pub fn bow_overlap(src: &TokenSeq, par: &TokenSeq) -> Result<f64, LexicalError> {
    if src.is_empty() || par.is_empty() {
        return Err(LexicalError::EmptyInput("bow_overlap"));
    }
    let a = counts(src);
    let b = counts(par);
    let common: usize = a.iter().map(|(tok, n)| b.get(tok).map_or(0, |m| (*n).min(*m))).sum();
    Ok(1.0 - common as f64 / src.len().max(par.len()) as f64)
}

/// Jaccard distance over token types.
pub fn token_jaccard(src: &TokenSeq, par: &TokenSeq) -> Result<f64, LexicalError> {
    if src.is_empty() || par.is_empty() {
        return Err(LexicalError::EmptyInput("token_jaccard"));
    }
    let a: HashSet<&str> = src.iter().map(String::as_str).collect();
    let b: HashSet<&str> = par.iter().map(String::as_str).collect();
    let inter = a.intersection(&b).count();
    let union = a.len() + b.len() - inter;
    Ok(1.0 - inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::tokenize;

    #[test]
    fn bow() {
        let abc = tokenize("a b c");
        assert_eq!(bow_overlap(&abc, &abc).unwrap(), 0.0);
        assert_eq!(bow_overlap(&abc, &tokenize("x y")).unwrap(), 1.0);
        assert_eq!(bow_overlap(&abc, &tokenize("a b d e")).unwrap(), 0.5);
        // permutation of the same multiset
        assert_eq!(bow_overlap(&tokenize("a a b"), &tokenize("b a a")).unwrap(), 0.0);
        assert!(bow_overlap(&abc, &tokenize("")).is_err());
    }

    #[test]
    fn jaccard() {
        let abc = tokenize("a b c");
        assert_eq!(token_jaccard(&abc, &abc).unwrap(), 0.0);
        assert_eq!(token_jaccard(&abc, &tokenize("b c d")).unwrap(), 0.5);
        assert_eq!(token_jaccard(&abc, &tokenize("x y z")).unwrap(), 1.0);
        assert!(token_jaccard(&tokenize(""), &abc).is_err());
    }
}

use std::collections::{BTreeSet, HashSet};

use log::info;

use super::{GenerationRecord, GenerationStatus, PipelineError};
use crate::corpus::{Corpus, SentencePair};

/// Trimmed text with internal whitespace runs collapsed to one space.
/// Case is kept.
pub fn normalize(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Every unordered pair of distinct sentences from `{source} ∪ paraphrases`.
/// Sentences are compared and emitted in normalized form; pairs are sorted
/// within and across.
pub fn pool_pairs<S: AsRef<str>>(source: &str, paraphrases: &[S]) -> Result<Vec<(String, String)>, PipelineError> {
    let pool: BTreeSet<String> = std::iter::once(source)
        .chain(paraphrases.iter().map(AsRef::as_ref))
        .map(normalize)
        .filter(|s| !s.is_empty())
        .collect();
    if pool.len() < 2 {
        return Err(PipelineError::DegeneratePool(pool.len()));
    }
    let members: Vec<&String> = pool.iter().collect();
    let mut out = Vec::with_capacity(members.len() * (members.len() - 1) / 2);
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            out.push(((*a).clone(), (*b).clone()));
        }
    }
    Ok(out)
}

/// Pools every `ok` generation record into pairs with ids
/// `<source_id>-<n>`. Records whose pool degenerates are skipped and their
/// ids returned.
pub fn pool_corpus(records: &[GenerationRecord]) -> Result<(Corpus, Vec<String>), PipelineError> {
    let mut corpus = Corpus::new();
    let mut degenerate = Vec::new();
    for rec in records.iter().filter(|r| r.status == GenerationStatus::Ok) {
        match pool_pairs(&rec.source_text, &rec.parsed_paraphrases) {
            Ok(pairs) => {
                for (n, (a, b)) in pairs.into_iter().enumerate() {
                    let id = format!("{}-{:02}", rec.source_id, n + 1);
                    corpus.push(SentencePair::new(id, a, b, rec.origin.clone())?)?;
                }
            }
            Err(PipelineError::DegeneratePool(_)) => {
                info!("{}: pool collapsed, no pairs", rec.source_id);
                degenerate.push(rec.source_id.clone());
            }
            Err(e) => return Err(e),
        }
    }
    Ok((corpus, degenerate))
}

/// Drops pairs with identical sides and pairs whose unordered text pair
/// already appeared. The first occurrence wins.
pub fn dedupe_corpus(corpus: &Corpus) -> Corpus {
    let mut seen: HashSet<(String, String)> = HashSet::with_capacity(corpus.len());
    let mut out = Corpus::new();
    for pair in corpus {
        let a = normalize(&pair.source_text);
        let b = normalize(&pair.paraphrase_text);
        if a == b {
            continue;
        }
        let key = if a <= b { (a, b) } else { (b, a) };
        if seen.insert(key) {
            out.push(pair.clone()).expect("ids of a valid corpus stay unique");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OriginTag;

    #[test]
    fn five_distinct_paraphrases() {
        let pairs = pool_pairs("s", &["a", "b", "c", "d", "e"]).unwrap();
        assert_eq!(pairs.len(), 15);
        assert!(pairs.iter().all(|(a, b)| a < b));
        assert!(pairs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn duplicate_of_source_collapses() {
        let pairs = pool_pairs("The  cat sat.", &["The cat sat. ", "b", "c", "d", "e"]).unwrap();
        assert_eq!(pairs.len(), 10);
        assert!(matches!(
            pool_pairs("x", &["x", " x "]),
            Err(PipelineError::DegeneratePool(1))
        ));
        // case differences are real edits
        assert_eq!(pool_pairs("x", &["X"]).unwrap().len(), 1);
    }

    fn pair(id: &str, a: &str, b: &str) -> SentencePair {
        SentencePair::new(id, a, b, OriginTag::Qqp).unwrap()
    }

    #[test]
    fn dedupe_rules() {
        let c = Corpus::from_pairs(vec![
            pair("1", "a", "b"),
            pair("2", "b", "a"),
            pair("3", "c", "c "),
            pair("4", "a", "c"),
        ])
        .unwrap();
        let d = dedupe_corpus(&c);
        assert_eq!(d.ids().collect::<Vec<_>>(), ["1", "4"]);
        assert_eq!(dedupe_corpus(&d), d);
    }
}

//! Corpus data model and the line-oriented file formats around it.
//!
//! Three JSONL layouts are understood, all keyed by an explicit pair id:
//!
//! * pairs: `{"id", "source", "paraphrase", "origin"}`
//! * trees: `{"id", "source_tree", "paraphrase_tree"}`
//! * embeddings: `{"id", "source_vec", "paraphrase_vec", "model"}`
//!
//! Pairs can also be read and written as TSV. Loaded structures are immutable
//! and can be shared freely between worker threads.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: duplicate id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unknown origin tag {tag:?}")]
    UnknownOrigin { line: usize, tag: String },
    #[error("line {line}: invalid embedding for {id:?}: {reason}")]
    InvalidEmbedding { line: usize, id: String, reason: String },
    #[error("invalid pair {id:?}: {reason}")]
    InvalidPair { id: String, reason: String },
}

/// Which source corpus a pair was drawn from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OriginTag {
    Mrpc,
    Qqp,
    Paws,
    ParaCommon,
    /// User-defined subset, written as `custom:<name>`.
    Custom(String),
}

impl OriginTag {
    pub fn custom(name: &str) -> Result<Self, String> {
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_lowercase())
            && name
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
        if valid {
            Ok(OriginTag::Custom(name.to_string()))
        } else {
            Err(format!("custom origin name {name:?} is not a lowercase identifier"))
        }
    }
}

impl fmt::Display for OriginTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OriginTag::Mrpc => f.write_str("mrpc"),
            OriginTag::Qqp => f.write_str("qqp"),
            OriginTag::Paws => f.write_str("paws"),
            OriginTag::ParaCommon => f.write_str("para_common"),
            OriginTag::Custom(name) => write!(f, "custom:{name}"),
        }
    }
}

impl FromStr for OriginTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mrpc" => Ok(OriginTag::Mrpc),
            "qqp" => Ok(OriginTag::Qqp),
            "paws" => Ok(OriginTag::Paws),
            "para_common" => Ok(OriginTag::ParaCommon),
            other => match other.strip_prefix("custom:") {
                Some(name) => OriginTag::custom(name),
                None => Err(format!("unknown origin tag {other:?}")),
            },
        }
    }
}

impl Serialize for OriginTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OriginTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (source, paraphrase) pair. Source is treated as the reference side
/// by every asymmetric metric.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentencePair {
    pub id: String,
    #[serde(rename = "source")]
    pub source_text: String,
    #[serde(rename = "paraphrase")]
    pub paraphrase_text: String,
    pub origin: OriginTag,
}

impl SentencePair {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        paraphrase: impl Into<String>,
        origin: OriginTag,
    ) -> Result<Self, CorpusError> {
        let pair = SentencePair {
            id: id.into(),
            source_text: source.into(),
            paraphrase_text: paraphrase.into(),
            origin,
        };
        pair.check().map_err(|reason| CorpusError::InvalidPair {
            id: pair.id.clone(),
            reason,
        })?;
        Ok(pair)
    }

    fn check(&self) -> Result<(), String> {
        if self.id.is_empty() {
            return Err("empty id".into());
        }
        if self.source_text.trim().is_empty() {
            return Err("empty source text".into());
        }
        if self.paraphrase_text.trim().is_empty() {
            return Err("empty paraphrase text".into());
        }
        Ok(())
    }
}

/// Ordered list of pairs with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    pairs: Vec<SentencePair>,
    seen: HashSet<String>,
}

impl Corpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: Vec<SentencePair>) -> Result<Self, CorpusError> {
        let mut corpus = Corpus::new();
        for pair in pairs {
            corpus.push(pair)?;
        }
        Ok(corpus)
    }

    pub fn push(&mut self, pair: SentencePair) -> Result<(), CorpusError> {
        pair.check().map_err(|reason| CorpusError::InvalidPair {
            id: pair.id.clone(),
            reason,
        })?;
        if !self.seen.insert(pair.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: self.pairs.len() + 1,
                id: pair.id,
            });
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn pairs(&self) -> &[SentencePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SentencePair> {
        self.pairs.iter()
    }

    pub fn into_pairs(self) -> Vec<SentencePair> {
        self.pairs
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.pairs.iter().map(|p| p.id.as_str())
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a SentencePair;
    type IntoIter = std::slice::Iter<'a, SentencePair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairFormat {
    Jsonl,
    Tsv,
}

impl FromStr for PairFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(PairFormat::Jsonl),
            "tsv" => Ok(PairFormat::Tsv),
            other => Err(format!("unknown pair format {other:?}")),
        }
    }
}

impl PairFormat {
    /// Guess from the file extension, defaulting to JSONL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => PairFormat::Tsv,
            _ => PairFormat::Jsonl,
        }
    }
}

/// Iterates non-blank lines as `(line_number, text)`, rejecting invalid UTF-8.
fn jsonl_lines<R: Read>(reader: R) -> impl Iterator<Item = Result<(usize, String), CorpusError>> {
    BufReader::new(reader)
        .split(b'\n')
        .enumerate()
        .filter_map(|(idx, bytes)| {
            let line = idx + 1;
            let bytes = match bytes {
                Ok(b) => b,
                Err(e) => return Some(Err(CorpusError::Io(e))),
            };
            let text = match String::from_utf8(bytes) {
                Ok(t) => t,
                Err(e) => {
                    return Some(Err(CorpusError::Malformed {
                        line,
                        reason: format!("invalid UTF-8: {e}"),
                    }))
                }
            };
            if text.trim().is_empty() {
                None
            } else {
                Some(Ok((line, text)))
            }
        })
}

#[derive(Deserialize)]
struct RawPair {
    id: String,
    source: String,
    paraphrase: String,
    origin: String,
}

fn raw_to_pair(raw: RawPair, line: usize) -> Result<SentencePair, CorpusError> {
    let origin = raw
        .origin
        .parse::<OriginTag>()
        .map_err(|_| CorpusError::UnknownOrigin {
            line,
            tag: raw.origin.clone(),
        })?;
    let pair = SentencePair {
        id: raw.id,
        source_text: raw.source,
        paraphrase_text: raw.paraphrase,
        origin,
    };
    pair.check().map_err(|reason| CorpusError::Malformed { line, reason })?;
    Ok(pair)
}

struct PairCollector {
    seen: HashSet<String>,
    pairs: Vec<SentencePair>,
}

impl PairCollector {
    fn new() -> Self {
        PairCollector {
            seen: HashSet::new(),
            pairs: Vec::new(),
        }
    }

    fn add(&mut self, pair: SentencePair, line: usize) -> Result<(), CorpusError> {
        if !self.seen.insert(pair.id.clone()) {
            return Err(CorpusError::DuplicateId { line, id: pair.id });
        }
        self.pairs.push(pair);
        Ok(())
    }

    fn finish(self) -> Corpus {
        Corpus {
            pairs: self.pairs,
            seen: self.seen,
        }
    }
}

pub fn read_corpus<R: Read>(reader: R, format: PairFormat) -> Result<Corpus, CorpusError> {
    match format {
        PairFormat::Jsonl => read_jsonl_pairs(reader),
        PairFormat::Tsv => read_tsv_pairs(reader),
    }
}

fn read_jsonl_pairs<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
    let mut out = PairCollector::new();
    for item in jsonl_lines(reader) {
        let (line, text) = item?;
        let raw: RawPair = serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        out.add(raw_to_pair(raw, line)?, line)?;
    }
    Ok(out.finish())
}

const TSV_HEADER: [&str; 4] = ["id", "source", "paraphrase", "origin"];

fn read_tsv_pairs<R: Read>(reader: R) -> Result<Corpus, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut out = PairCollector::new();
    for (idx, record) in rdr.byte_records().enumerate() {
        let record = record.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(idx + 1, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        let fields = record
            .iter()
            .map(|f| String::from_utf8(f.to_vec()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CorpusError::Malformed {
                line,
                reason: format!("invalid UTF-8: {e}"),
            })?;
        if idx == 0 && fields.iter().map(String::as_str).eq(TSV_HEADER) {
            continue;
        }
        let [id, source, paraphrase, origin]: [String; 4] =
            fields.try_into().map_err(|f: Vec<String>| CorpusError::Malformed {
                line,
                reason: format!("expected 4 tab-separated fields, found {}", f.len()),
            })?;
        let raw = RawPair {
            id,
            source,
            paraphrase,
            origin,
        };
        out.add(raw_to_pair(raw, line)?, line)?;
    }
    Ok(out.finish())
}

pub fn load_corpus(path: impl AsRef<Path>, format: PairFormat) -> Result<Corpus, CorpusError> {
    read_corpus(File::open(path)?, format)
}

pub fn write_corpus<W: Write>(corpus: &Corpus, writer: W, format: PairFormat) -> Result<(), CorpusError> {
    match format {
        PairFormat::Jsonl => {
            let mut w = BufWriter::new(writer);
            for pair in corpus {
                serde_json::to_writer(&mut w, pair).map_err(io::Error::from)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
        }
        PairFormat::Tsv => {
            if corpus.is_empty() {
                return Ok(());
            }
            let mut w = csv::WriterBuilder::new()
                .delimiter(b'\t')
                .quote_style(csv::QuoteStyle::Necessary)
                .from_writer(writer);
            let csv_err = |e: csv::Error| CorpusError::Io(io::Error::other(e));
            w.write_record(TSV_HEADER).map_err(csv_err)?;
            for pair in corpus {
                let origin = pair.origin.to_string();
                w.write_record([pair.id.as_str(), &pair.source_text, &pair.paraphrase_text, &origin])
                    .map_err(csv_err)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn write_pairs(corpus: &Corpus, path: impl AsRef<Path>, format: PairFormat) -> Result<(), CorpusError> {
    write_corpus(corpus, File::create(path)?, format)
}

/// Unparsed bracket strings for both sides of a pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeEntry {
    pub source_tree: String,
    pub paraphrase_tree: String,
}

/// Parse-tree sidecar keyed by pair id. Strings are kept verbatim and only
/// parsed when a syntactic metric needs them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TreeSidecar {
    entries: HashMap<String, TreeEntry>,
}

impl TreeSidecar {
    pub fn get(&self, id: &str) -> Option<&TreeEntry> {
        self.entries.get(id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, id: impl Into<String>, entry: TreeEntry) -> Option<TreeEntry> {
        self.entries.insert(id.into(), entry)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &TreeEntry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[derive(Deserialize)]
struct RawTree {
    id: String,
    source_tree: String,
    paraphrase_tree: String,
}

pub fn read_tree_sidecar<R: Read>(reader: R) -> Result<TreeSidecar, CorpusError> {
    let mut sidecar = TreeSidecar::default();
    for item in jsonl_lines(reader) {
        let (line, text) = item?;
        let raw: RawTree = serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        if sidecar.entries.contains_key(&raw.id) {
            return Err(CorpusError::DuplicateId { line, id: raw.id });
        }
        sidecar.entries.insert(
            raw.id,
            TreeEntry {
                source_tree: raw.source_tree,
                paraphrase_tree: raw.paraphrase_tree,
            },
        );
    }
    Ok(sidecar)
}

pub fn load_tree_sidecar(path: impl AsRef<Path>) -> Result<TreeSidecar, CorpusError> {
    read_tree_sidecar(File::open(path)?)
}

/// Stored sentence embeddings for one pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub source_vec: Vec<f64>,
    pub paraphrase_vec: Vec<f64>,
    #[serde(rename = "model")]
    pub model_name: String,
}

impl EmbeddingRecord {
    pub fn dimension(&self) -> usize {
        self.source_vec.len()
    }

    pub fn check(&self) -> Result<(), String> {
        if self.source_vec.is_empty() {
            return Err("empty source_vec".into());
        }
        if self.source_vec.len() != self.paraphrase_vec.len() {
            return Err(format!(
                "dimension mismatch: source_vec has {}, paraphrase_vec has {}",
                self.source_vec.len(),
                self.paraphrase_vec.len()
            ));
        }
        for (name, v) in [
            ("source_vec", &self.source_vec),
            ("paraphrase_vec", &self.paraphrase_vec),
        ] {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(format!("non-finite component in {name}"));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(format!("zero-norm {name}"));
            }
        }
        Ok(())
    }
}

pub fn read_embeddings<R: Read>(reader: R) -> Result<Vec<EmbeddingRecord>, CorpusError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for item in jsonl_lines(reader) {
        let (line, text) = item?;
        // serde_json rejects NaN/Infinity literals, so non-finite values can
        // only arrive as overflowing numbers like 1e999.
        let record: EmbeddingRecord = serde_json::from_str(&text).map_err(|e| CorpusError::Malformed {
            line,
            reason: e.to_string(),
        })?;
        record.check().map_err(|reason| CorpusError::InvalidEmbedding {
            line,
            id: record.id.clone(),
            reason,
        })?;
        if !seen.insert((record.model_name.clone(), record.id.clone())) {
            return Err(CorpusError::DuplicateId { line, id: record.id });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<Vec<EmbeddingRecord>, CorpusError> {
    read_embeddings(File::open(path)?)
}

/// Pair ids absent from each sidecar, in corpus order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JoinReport {
    pub missing_trees: Vec<String>,
    /// model name → ids without an embedding record
    pub missing_embeddings: BTreeMap<String, Vec<String>>,
}

impl JoinReport {
    pub fn is_complete(&self) -> bool {
        self.missing_trees.is_empty() && self.missing_embeddings.values().all(Vec::is_empty)
    }
}

pub fn join_check(corpus: &Corpus, trees: Option<&TreeSidecar>, embeddings: &[EmbeddingRecord]) -> JoinReport {
    let mut report = JoinReport::default();
    if let Some(trees) = trees {
        report.missing_trees = corpus
            .ids()
            .filter(|id| trees.get(id).is_none())
            .map(str::to_string)
            .collect();
    }
    let mut by_model: BTreeMap<&str, HashSet<&str>> = BTreeMap::new();
    for rec in embeddings {
        by_model
            .entry(rec.model_name.as_str())
            .or_default()
            .insert(rec.id.as_str());
    }
    for (model, ids) in by_model {
        let missing = corpus
            .ids()
            .filter(|id| !ids.contains(id))
            .map(str::to_string)
            .collect();
        report.missing_embeddings.insert(model.to_string(), missing);
    }
    report
}

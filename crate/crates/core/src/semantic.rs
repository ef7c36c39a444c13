//! Cosine similarity between sentence embeddings, with vectors supplied by
//! an [`EmbeddingProvider`].

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{EmbeddingRecord, SentencePair};
use crate::http::{ClientConfig, HttpError, JsonClient};

pub const EMBED_KEY_VAR: &str = "PARAFUSE_EMBED_KEY";

#[derive(Debug, Error)]
pub enum SemanticError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("no embedding for pair {0:?}")]
    MissingEmbedding(String),
    #[error("provider configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Http(#[from] HttpError),
    #[error("bad embedding response: {0}")]
    Response(String),
    #[error("pair {id:?}: {source}")]
    Pair {
        id: String,
        #[source]
        source: Box<SemanticError>,
    },
}

impl SemanticError {
    pub fn is_remote(&self) -> bool {
        match self {
            SemanticError::Http(_) | SemanticError::Response(_) => true,
            SemanticError::Pair { source, .. } => source.is_remote(),
            _ => false,
        }
    }
}

/// `u·v / (|u||v|)`, clamped to `[-1, 1]`.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SemanticError> {
    if u.len() != v.len() {
        return Err(SemanticError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(SemanticError::ZeroNorm);
    }
    Ok((dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0))
}

/// Source and paraphrase vectors of one pair.
pub type VectorPair = (Arc<[f64]>, Arc<[f64]>);

pub trait EmbeddingProvider: Send + Sync {
    fn model_name(&self) -> &str;

    /// Source and paraphrase vectors for one pair.
    fn pair_vectors(&self, pair: &SentencePair) -> Result<VectorPair, SemanticError>;

    /// Hint that these pairs are about to be scored, so remote providers can
    /// batch their requests up front.
    fn warm(&self, _pairs: &[SentencePair]) -> Result<(), SemanticError> {
        Ok(())
    }
}

/// Serves vectors from an embeddings sidecar, keyed by pair id.
#[derive(Debug)]
pub struct FileProvider {
    model: String,
    dim: usize,
    vectors: HashMap<String, VectorPair>,
}

impl FileProvider {
    /// All records must share one model and one dimension.
    pub fn new(records: Vec<EmbeddingRecord>) -> Result<Self, SemanticError> {
        let first = records
            .first()
            .ok_or_else(|| SemanticError::Config("no embedding records".into()))?;
        let model = first.model_name.clone();
        let dim = first.dimension();
        let mut vectors = HashMap::with_capacity(records.len());
        for r in records {
            if r.model_name != model {
                return Err(SemanticError::Config(format!(
                    "mixed models {model:?} and {:?}",
                    r.model_name
                )));
            }
            r.check()
                .map_err(|e| SemanticError::Config(format!("record {:?}: {e}", r.id)))?;
            if r.dimension() != dim {
                return Err(SemanticError::Config(format!(
                    "mixed dimensions {dim} and {} (record {:?})",
                    r.dimension(),
                    r.id
                )));
            }
            if vectors.contains_key(&r.id) {
                return Err(SemanticError::Config(format!("duplicate id {:?}", r.id)));
            }
            vectors.insert(r.id, (r.source_vec.into(), r.paraphrase_vec.into()));
        }
        Ok(FileProvider { model, dim, vectors })
    }

    /// One provider per model, in order of first appearance.
    pub fn by_model(records: Vec<EmbeddingRecord>) -> Result<Vec<Self>, SemanticError> {
        let mut groups: Vec<(String, Vec<EmbeddingRecord>)> = Vec::new();
        for r in records {
            match groups.iter_mut().find(|(m, _)| *m == r.model_name) {
                Some((_, g)) => g.push(r),
                None => groups.push((r.model_name.clone(), vec![r])),
            }
        }
        groups.into_iter().map(|(_, g)| Self::new(g)).collect()
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }
}

impl EmbeddingProvider for FileProvider {
    fn model_name(&self) -> &str {
        &self.model
    }

    fn pair_vectors(&self, pair: &SentencePair) -> Result<VectorPair, SemanticError> {
        self.vectors
            .get(&pair.id)
            .cloned()
            .ok_or_else(|| SemanticError::MissingEmbedding(pair.id.clone()))
    }
}

#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub endpoint: String,
    pub model: String,
    pub batch_size: usize,
    pub client: ClientConfig,
}

type TextKey = [u8; 32];

/// Embeds texts through an OpenAI-compatible `/embeddings` endpoint.
/// Vectors are cached per text for the lifetime of the provider.
#[derive(Debug)]
pub struct HttpProvider {
    config: HttpProviderConfig,
    client: JsonClient,
    dim: OnceLock<usize>,
    cache: RwLock<HashMap<TextKey, Arc<[f64]>>>,
}

impl HttpProvider {
    /// Uses `PARAFUSE_EMBED_KEY` as the bearer token when set.
    pub fn new(config: HttpProviderConfig) -> Result<Self, SemanticError> {
        let client = JsonClient::with_env_key(&config.client, EMBED_KEY_VAR)?;
        Self::with_client(config, client)
    }

    pub fn with_client(config: HttpProviderConfig, client: JsonClient) -> Result<Self, SemanticError> {
        if config.model.is_empty() {
            return Err(SemanticError::Config("empty model name".into()));
        }
        if config.batch_size == 0 {
            return Err(SemanticError::Config("batch size must be positive".into()));
        }
        Ok(HttpProvider {
            config,
            client,
            dim: OnceLock::new(),
            cache: RwLock::new(HashMap::new()),
        })
    }

    fn key(&self, text: &str) -> TextKey {
        let mut h = Sha256::new();
        h.update(self.config.model.as_bytes());
        h.update([0u8]);
        h.update(text.as_bytes());
        h.finalize().into()
    }

    fn cached(&self, key: &TextKey) -> Option<Arc<[f64]>> {
        self.cache.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned()
    }

    fn request(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, SemanticError> {
        let body = json!({ "model": self.config.model, "input": texts });
        let reply = self.client.post_json(&self.config.endpoint, &body)?;
        let vectors = parse_embedding_response(&reply, texts.len())?;
        for v in &vectors {
            let dim = *self.dim.get_or_init(|| v.len());
            if v.len() != dim {
                return Err(SemanticError::Response(format!(
                    "dimension changed from {dim} to {}",
                    v.len()
                )));
            }
            if v.iter().all(|&x| x == 0.0) {
                return Err(SemanticError::ZeroNorm);
            }
        }
        Ok(vectors)
    }

    /// Vectors for `texts`, in input order.
    pub fn embed(&self, texts: &[&str]) -> Result<Vec<Arc<[f64]>>, SemanticError> {
        let keys: Vec<TextKey> = texts.iter().map(|t| self.key(t)).collect();
        let mut missing: Vec<(TextKey, &str)> = Vec::new();
        for (k, t) in keys.iter().zip(texts) {
            if self.cached(k).is_none() && !missing.iter().any(|(m, _)| m == k) {
                missing.push((*k, t));
            }
        }
        for chunk in missing.chunks(self.config.batch_size) {
            let batch: Vec<&str> = chunk.iter().map(|(_, t)| *t).collect();
            let vectors = self.request(&batch)?;
            let mut cache = self.cache.write().unwrap_or_else(|e| e.into_inner());
            for ((k, _), v) in chunk.iter().zip(vectors) {
                cache.entry(*k).or_insert_with(|| v.into());
            }
        }
        keys.iter()
            .map(|k| {
                self.cached(k)
                    .ok_or_else(|| SemanticError::Response("vector missing after fetch".into()))
            })
            .collect()
    }
}

fn parse_embedding_response(reply: &Value, expected: usize) -> Result<Vec<Vec<f64>>, SemanticError> {
    let data = reply
        .get("data")
        .and_then(Value::as_array)
        .ok_or_else(|| SemanticError::Response("missing \"data\" array".into()))?;
    if data.len() != expected {
        return Err(SemanticError::Response(format!(
            "expected {expected} embeddings, got {}",
            data.len()
        )));
    }
    let mut out: Vec<Option<Vec<f64>>> = vec![None; expected];
    for (pos, item) in data.iter().enumerate() {
        let index = match item.get("index") {
            Some(i) => i
                .as_u64()
                .map(|i| i as usize)
                .ok_or_else(|| SemanticError::Response("non-integer index".into()))?,
            None => pos,
        };
        let emb = item
            .get("embedding")
            .and_then(Value::as_array)
            .ok_or_else(|| SemanticError::Response(format!("item {pos}: missing embedding")))?;
        let v = emb
            .iter()
            .map(|x| x.as_f64().filter(|f| f.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| SemanticError::Response(format!("item {pos}: non-finite component")))?;
        match out.get_mut(index) {
            Some(slot @ None) => *slot = Some(v),
            Some(Some(_)) => return Err(SemanticError::Response(format!("duplicate index {index}"))),
            None => return Err(SemanticError::Response(format!("index {index} out of range"))),
        }
    }
    Ok(out.into_iter().map(|v| v.unwrap_or_default()).collect())
}

impl EmbeddingProvider for HttpProvider {
    fn model_name(&self) -> &str {
        &self.config.model
    }

    fn pair_vectors(&self, pair: &SentencePair) -> Result<VectorPair, SemanticError> {
        let mut v = self.embed(&[&pair.source_text, &pair.paraphrase_text])?;
        let p = v.pop().unwrap_or_else(|| Arc::from([]));
        let s = v.pop().unwrap_or_else(|| Arc::from([]));
        Ok((s, p))
    }

    fn warm(&self, pairs: &[SentencePair]) -> Result<(), SemanticError> {
        let texts: Vec<&str> = pairs
            .iter()
            .flat_map(|p| [p.source_text.as_str(), p.paraphrase_text.as_str()])
            .collect();
        self.embed(&texts).map(drop)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticScore {
    pub model_name: String,
    pub value: f64,
}

pub fn semantic_score(pair: &SentencePair, provider: &dyn EmbeddingProvider) -> Result<SemanticScore, SemanticError> {
    let attach = |e: SemanticError| SemanticError::Pair {
        id: pair.id.clone(),
        source: Box::new(e),
    };
    let (s, p) = provider.pair_vectors(pair).map_err(attach)?;
    Ok(SemanticScore {
        model_name: provider.model_name().to_string(),
        value: cosine(&s, &p).map_err(attach)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::OriginTag;

    fn rec(id: &str, s: Vec<f64>, p: Vec<f64>, model: &str) -> EmbeddingRecord {
        EmbeddingRecord {
            id: id.into(),
            source_vec: s,
            paraphrase_vec: p,
            model_name: model.into(),
        }
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let v = cosine(&[1.0, 1.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(matches!(
            cosine(&[1.0], &[1.0, 2.0]),
            Err(SemanticError::DimensionMismatch(1, 2))
        ));
        assert!(matches!(cosine(&[0.0, 0.0], &[1.0, 2.0]), Err(SemanticError::ZeroNorm)));
    }

    #[test]
    fn file_provider_lookup() {
        let fp = FileProvider::new(vec![
            rec("p1", vec![1.0, 0.0], vec![0.0, 1.0], "m"),
            rec("sem-02", vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0], "m"),
        ])
        .unwrap();
        let p1 = SentencePair::new("p1", "a", "b", OriginTag::Mrpc).unwrap();
        let s = semantic_score(&p1, &fp).unwrap();
        assert_eq!(
            s,
            SemanticScore {
                model_name: "m".into(),
                value: 0.0
            }
        );
        let p2 = SentencePair::new("sem-02", "a", "b", OriginTag::Mrpc).unwrap();
        assert!((semantic_score(&p2, &fp).unwrap().value - 0.5).abs() < 1e-12);

        let p9 = SentencePair::new("p9", "a", "b", OriginTag::Mrpc).unwrap();
        let err = semantic_score(&p9, &fp).unwrap_err();
        assert!(err.to_string().contains("p9"));
    }

    #[test]
    fn file_provider_rejects_mixed_dims() {
        let err = FileProvider::new(vec![
            rec("a", vec![1.0; 384], vec![1.0; 384], "m"),
            rec("b", vec![1.0; 768], vec![1.0; 768], "m"),
        ])
        .unwrap_err();
        assert!(matches!(err, SemanticError::Config(_)));
    }

    #[test]
    fn by_model_splits_in_order() {
        let ps = FileProvider::by_model(vec![
            rec("a", vec![1.0], vec![1.0], "y"),
            rec("a", vec![1.0, 2.0], vec![1.0, 2.0], "x"),
            rec("b", vec![2.0], vec![1.0], "y"),
        ])
        .unwrap();
        let names: Vec<&str> = ps.iter().map(|p| p.model_name()).collect();
        assert_eq!(names, ["y", "x"]);
        assert_eq!(ps[1].dimension(), 2);
    }

    #[test]
    fn response_parsing() {
        let r = json!({"data": [
            {"index": 1, "embedding": [0.0, 1.0]},
            {"index": 0, "embedding": [1.0, 0.0]}
        ]});
        assert_eq!(
            parse_embedding_response(&r, 2).unwrap(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        assert!(parse_embedding_response(&r, 3).is_err());
        let dup = json!({"data": [{"index": 0, "embedding": [1.0]}, {"index": 0, "embedding": [1.0]}]});
        assert!(parse_embedding_response(&dup, 2).is_err());
    }
}

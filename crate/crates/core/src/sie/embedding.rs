use std::collections::HashMap;
use std::path::Path;

use crate::classifier::linalg::dot;
use crate::error::{Error, Result};

/// Static word vectors. Phrases embed as the mean of their in-vocabulary
/// word vectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn from_vectors(entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self> {
        let mut table = Self::default();
        for (word, v) in entries {
            table.insert(word, v)?;
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, v: Vec<f64>) -> Result<()> {
        if self.vectors.is_empty() {
            self.dim = v.len();
        }
        if v.is_empty() || v.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "vector for `{word}` has {} values, expected {}",
                v.len(),
                self.dim
            )));
        }
        self.vectors.insert(word.to_lowercase(), v);
        Ok(())
    }

    /// `token v1 … vd` per line, with an optional leading `count dim` header.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut table = Self::default();
        let mut declared: Option<(usize, usize)> = None;
        for (n, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let loc = || format!("{origin}:{}", n + 1);
            if n == 0 && fields.len() == 2 {
                if let (Ok(c), Ok(d)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) {
                    declared = Some((c, d));
                    table.dim = d;
                    continue;
                }
            }
            let v = fields[1..]
                .iter()
                .map(|x| x.parse::<f64>().map_err(|_| Error::parse(loc(), format!("bad number `{x}`"))))
                .collect::<Result<Vec<_>>>()?;
            if let Some((_, d)) = declared {
                if v.len() != d {
                    return Err(Error::parse(loc(), format!("expected {d} values, found {}", v.len())));
                }
            }
            table.insert(fields[0].to_string(), v).map_err(|e| Error::parse(loc(), e.to_string()))?;
        }
        if let Some((c, _)) = declared {
            if c != table.vectors.len() {
                return Err(Error::parse(origin, format!("header declares {c} vectors, found {}", table.vectors.len())));
            }
        }
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Mean vector of the whitespace-separated, lowercased words of `phrase`
    /// that have vectors.
    pub fn phrase_vector(&self, phrase: &str) -> Result<Vec<f64>> {
        let mut sum = vec![0.0; self.dim];
        let mut n = 0usize;
        for w in phrase.split_whitespace() {
            if let Some(v) = self.vectors.get(&w.to_lowercase()) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::OutOfVocabularyPhrase(phrase.to_string()));
        }
        sum.iter_mut().for_each(|s| *s /= n as f64);
        Ok(sum)
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = dot(a, a).sqrt();
    let nb = dot(b, b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

pub fn group_similarity(group_a: &str, group_b: &str, emb: &EmbeddingTable) -> Result<f64> {
    Ok(cosine(&emb.phrase_vector(group_a)?, &emb.phrase_vector(group_b)?))
}

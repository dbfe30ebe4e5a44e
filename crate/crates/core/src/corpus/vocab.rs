use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const OOV_ID: u32 = 0;
/// Reserved symbol at index 0. The tokenizer cannot produce it.
pub const OOV_TOKEN: &str = "<oov>";

/// A tokenized document with vocabulary ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDoc {
    pub tokens: Vec<String>,
    pub ids: Vec<u32>,
    /// Index of the originating record, if any.
    pub source: Option<usize>,
}

impl TokenizedDoc {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn remove(&self, position: usize) -> TokenizedDoc {
        let mut doc = self.clone();
        doc.tokens.remove(position);
        doc.ids.remove(position);
        doc
    }

    pub fn insert(&self, position: usize, token: &str, vocab: &Vocab) -> TokenizedDoc {
        let mut doc = self.clone();
        doc.tokens.insert(position, token.to_string());
        doc.ids.insert(position, vocab.id(token));
        doc
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    index: HashMap<String, u32>,
    tokens: Vec<String>,
    freqs: BTreeMap<String, usize>,
}

impl Vocab {
    /// Number of indices including the OOV slot.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 1
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(OOV_ID)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Corpus words in index order (index 1 first).
    pub fn words(&self) -> &[String] {
        &self.tokens[1..]
    }

    /// Training-split frequency, including tokens below `min_freq`.
    pub fn frequency(&self, token: &str) -> usize {
        self.freqs.get(token).copied().unwrap_or(0)
    }

    pub fn frequencies(&self) -> &BTreeMap<String, usize> {
        &self.freqs
    }

    pub fn encode(&self, tokens: Vec<String>, source: Option<usize>) -> Result<TokenizedDoc> {
        if tokens.is_empty() {
            return Err(Error::EmptyDocument);
        }
        let ids = tokens.iter().map(|t| self.id(t)).collect();
        Ok(TokenizedDoc { tokens, ids, source })
    }

    /// Short stable fingerprint of the index→token list.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for t in &self.tokens {
            hasher.update(t.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Indexes every training token with frequency ≥ `min_freq` in descending
/// frequency order, ties broken lexicographically. Index 0 is OOV.
pub fn build_vocab<D: AsRef<[String]>>(train_docs: &[D], min_freq: usize) -> Result<Vocab> {
    if min_freq < 1 {
        return Err(Error::InvalidParameter("min_freq must be >= 1".into()));
    }
    if train_docs.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut freqs: BTreeMap<String, usize> = BTreeMap::new();
    for doc in train_docs {
        for t in doc.as_ref() {
            *freqs.entry(t.clone()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&String, usize)> = freqs
        .iter()
        .filter(|(_, &f)| f >= min_freq)
        .map(|(t, &f)| (t, f))
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));

    let mut tokens = Vec::with_capacity(kept.len() + 1);
    tokens.push(OOV_TOKEN.to_string());
    tokens.extend(kept.iter().map(|(t, _)| (*t).clone()));
    let index = tokens
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    Ok(Vocab { index, tokens, freqs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn docs(words: &[&[&str]]) -> Vec<Vec<String>> {
        words.iter().map(|d| d.iter().map(|s| s.to_string()).collect()).collect()
    }

    #[test]
    fn frequency_order() {
        let v = build_vocab(&docs(&[&["a", "b", "a"]]), 1).unwrap();
        assert_eq!(v.id("a"), 1);
        assert_eq!(v.id("b"), 2);
        assert_eq!(v.len(), 3);
    }

    #[test]
    fn min_freq_threshold() {
        let v = build_vocab(&docs(&[&["a", "b", "a"]]), 2).unwrap();
        assert_eq!(v.id("a"), 1);
        assert_eq!(v.id("b"), OOV_ID);
        assert_eq!(v.frequency("b"), 1);
        assert_eq!(v.id("zzz"), OOV_ID);
    }

    #[test]
    fn ties_lexicographic() {
        let v = build_vocab(&docs(&[&["c", "b", "a"]]), 1).unwrap();
        assert_eq!(v.words(), &["a", "b", "c"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(build_vocab::<Vec<String>>(&[], 1), Err(Error::EmptyTrainingSet)));
        assert!(build_vocab(&docs(&[&["a"]]), 0).is_err());
    }

    #[test]
    fn hash_depends_on_order() {
        let a = build_vocab(&docs(&[&["a", "b", "a"]]), 1).unwrap();
        let b = build_vocab(&docs(&[&["a", "b", "b"]]), 1).unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), a.clone().hash());
    }

    proptest! {
        #[test]
        fn non_oov_iff_frequent(
            corpus in proptest::collection::vec(proptest::collection::vec(0u8..12, 1..8), 1..20),
            min_freq in 1usize..4,
        ) {
            let docs: Vec<Vec<String>> = corpus
                .iter()
                .map(|d| d.iter().map(|x| format!("w{x}")).collect())
                .collect();
            let v = build_vocab(&docs, min_freq).unwrap();
            for d in &docs {
                for t in d {
                    prop_assert_eq!(v.frequency(t) >= min_freq, v.id(t) != OOV_ID);
                    if v.id(t) != OOV_ID {
                        prop_assert_eq!(v.token(v.id(t)), Some(t.as_str()));
                    }
                }
            }
        }
    }
}

//! Add-k smoothed n-gram language model.
//!
//! `P(w | ctx) = (c(ctx, w) + k) / (c(ctx) + k·V)` where `ctx` is the last
//! `n − 1` tokens, `c(ctx)` counts `ctx` as a history and `V` counts every
//! training word plus the OOV symbol and `</s>`. Sentences are padded with
//! `n − 1` copies of `<s>`, which is never predicted.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const LM_OOV: &str = "<unk>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LmConfig {
    pub order: usize,
    pub k: f64,
    /// Training words seen fewer times map to the OOV symbol.
    pub min_count: usize,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            order: 3,
            k: 0.1,
            min_count: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NgramLm {
    config: LmConfig,
    /// Predictable symbols: words, then OOV, then `</s>`.
    symbols: Vec<String>,
    index: HashMap<String, u32>,
    bos: u32,
    oov: u32,
    /// `counts[m - 1]` maps m-grams to their counts, m = 1..=n.
    counts: Vec<HashMap<Vec<u32>, u64>>,
    /// Counts of (n−1)-gram histories followed by any symbol.
    history: HashMap<Vec<u32>, u64>,
}

impl NgramLm {
    pub fn train<S: AsRef<[String]>>(sentences: &[S], config: LmConfig) -> Result<Self> {
        if config.order < 1 {
            return Err(Error::InvalidParameter("LM order must be >= 1".into()));
        }
        if config.k.is_nan() || config.k <= 0.0 {
            return Err(Error::InvalidParameter("add-k constant must be > 0".into()));
        }
        let mut word_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for s in sentences {
            for w in s.as_ref() {
                *word_counts.entry(w.as_str()).or_default() += 1;
            }
        }
        let mut symbols: Vec<String> = word_counts
            .iter()
            .filter(|(_, &c)| c >= config.min_count.max(1))
            .map(|(w, _)| w.to_string())
            .collect();
        symbols.push(LM_OOV.to_string());
        symbols.push(EOS.to_string());
        let index: HashMap<String, u32> = symbols.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let oov = index[LM_OOV];
        let bos = symbols.len() as u32;

        let n = config.order;
        let mut lm = NgramLm {
            config,
            symbols,
            index,
            bos,
            oov,
            counts: vec![HashMap::new(); n],
            history: HashMap::new(),
        };
        for s in sentences {
            let seq = lm.padded(s.as_ref(), true);
            for end in n - 1..seq.len() {
                for m in 1..=n {
                    let gram = seq[end + 1 - m..=end].to_vec();
                    // padding-only prefixes are not m-grams of the sentence
                    if m < n && gram.iter().all(|&t| t == lm.bos) {
                        continue;
                    }
                    *lm.counts[m - 1].entry(gram).or_default() += 1;
                }
                *lm.history.entry(seq[end + 1 - n..end].to_vec()).or_default() += 1;
            }
        }
        Ok(lm)
    }

    pub fn config(&self) -> &LmConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Size of the predictable vocabulary `V`.
    pub fn vocab_size(&self) -> usize {
        self.symbols.len()
    }

    /// Predictable symbols, including OOV and `</s>`.
    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    fn id(&self, token: &str) -> u32 {
        match token {
            BOS => self.bos,
            _ => self.index.get(token).copied().unwrap_or(self.oov),
        }
    }

    fn padded(&self, tokens: &[String], with_eos: bool) -> Vec<u32> {
        let mut seq = vec![self.bos; self.config.order - 1];
        seq.extend(tokens.iter().map(|t| self.id(t)));
        if with_eos {
            seq.push(self.index[EOS]);
        }
        seq
    }

    /// Count of an m-gram given as tokens (`<s>` allowed).
    pub fn count(&self, gram: &[&str]) -> u64 {
        if gram.is_empty() || gram.len() > self.config.order {
            return 0;
        }
        let ids: Vec<u32> = gram.iter().map(|t| self.id(t)).collect();
        self.counts[gram.len() - 1].get(&ids).copied().unwrap_or(0)
    }

    fn prob_ids(&self, ctx: &[u32], w: u32) -> f64 {
        let mut gram = ctx.to_vec();
        gram.push(w);
        let c = self.counts[self.config.order - 1].get(&gram).copied().unwrap_or(0) as f64;
        let h = self.history.get(ctx).copied().unwrap_or(0) as f64;
        (c + self.config.k) / (h + self.config.k * self.vocab_size() as f64)
    }

    /// `P(word | context)`. Only the last `n − 1` context tokens are used;
    /// shorter contexts are left-padded with `<s>`.
    pub fn prob(&self, context: &[&str], word: &str) -> f64 {
        let n1 = self.config.order - 1;
        let mut ctx: Vec<u32> = vec![self.bos; n1.saturating_sub(context.len())];
        let skip = context.len().saturating_sub(n1);
        ctx.extend(context[skip..].iter().map(|t| self.id(t)));
        self.prob_ids(&ctx, self.id(word))
    }

    fn score(&self, tokens: &[String], with_eos: bool) -> f64 {
        let n = self.config.order;
        let seq = self.padded(tokens, with_eos);
        (n - 1..seq.len()).map(|end| self.prob_ids(&seq[end + 1 - n..end], seq[end]).ln()).sum()
    }

    /// Log-probability of a full sentence including `</s>`.
    pub fn score_sentence(&self, tokens: &[String]) -> f64 {
        self.score(tokens, true)
    }

    /// Log-probability of `tokens` as a sentence prefix (no `</s>`).
    pub fn score_prefix(&self, tokens: &[String]) -> f64 {
        self.score(tokens, false)
    }
}

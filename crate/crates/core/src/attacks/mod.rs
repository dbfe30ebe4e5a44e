//! Leave-one-out and adversarial-adding attacks.
//!
//! Every perturbation changes a document by exactly one token: LOO kinds
//! delete the max-salient token, AA kinds insert a pool word next to it (or
//! at the front for AA-Q). AA examples are scored once per pool word and the
//! attacked accuracy is the mean correctness over all copies.

mod report;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{AblationReport, ReportRow};

use crate::classifier::{Model, ModelInput, TestSet};
use crate::corpus::{TokenizedDoc, Vocab};
use crate::error::{Error, Result};
use crate::lexicon;
use crate::saliency::{attacked_side_map, max_salient_index, top_k_pool, PoolFilter, SaliencyMap, TypeSaliencyTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AttackKind {
    #[serde(rename = "LOO")]
    Loo,
    #[serde(rename = "LOO-S")]
    LooS,
    #[serde(rename = "AA-S")]
    AaS,
    #[serde(rename = "AA-R")]
    AaR,
    #[serde(rename = "AA-Q")]
    AaQ,
}

impl AttackKind {
    /// Report column order.
    pub const ALL: [AttackKind; 5] = [AttackKind::Loo, AttackKind::LooS, AttackKind::AaS, AttackKind::AaR, AttackKind::AaQ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::Loo => "LOO",
            AttackKind::LooS => "LOO-S",
            AttackKind::AaS => "AA-S",
            AttackKind::AaR => "AA-R",
            AttackKind::AaQ => "AA-Q",
        }
    }

    pub fn is_insertion(self) -> bool {
        matches!(self, AttackKind::AaS | AttackKind::AaR | AttackKind::AaQ)
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown attack `{s}` (expected one of loo, loo-s, aa-s, aa-r, aa-q)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositionPolicy {
    AfterMaxSaliency,
    Prepend,
}

/// Words inserted into examples, indexed by the example's gold class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsertionPools {
    per_gold_class: Vec<Vec<String>>,
}

impl InsertionPools {
    /// `class_pools[c]` holds the salient words of class `c`; examples of
    /// gold class `g` receive the pool of `opposite[g]`.
    pub fn opposite(class_pools: &[Vec<String>], opposite: &[usize]) -> Result<Self> {
        let per_gold_class = opposite
            .iter()
            .enumerate()
            .map(|(g, &o)| {
                if o == g || o >= class_pools.len() {
                    return Err(Error::InvalidParameter(format!("invalid opposite class {o} for class {g}")));
                }
                Ok(class_pools[o].clone())
            })
            .collect::<Result<_>>()?;
        Ok(Self { per_gold_class })
    }

    /// The same words for every gold class.
    pub fn uniform(words: Vec<String>, n_classes: usize) -> Self {
        Self {
            per_gold_class: vec![words; n_classes],
        }
    }

    pub fn for_class(&self, gold: usize) -> &[String] {
        self.per_gold_class.get(gold).map_or(&[], Vec::as_slice)
    }

    pub fn n_classes(&self) -> usize {
        self.per_gold_class.len()
    }
}

/// Opposite-class map for the binary task.
pub const HS_OPPOSITE: [usize; 2] = [1, 0];
/// Default opposite-class map for entail / neutral / contradict.
pub const SIE_OPPOSITE: [usize; 3] = [1, 0, 0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackSpec {
    pub kind: AttackKind,
    pub pools: Option<InsertionPools>,
    pub policy: PositionPolicy,
}

impl AttackSpec {
    pub fn loo() -> Self {
        Self {
            kind: AttackKind::Loo,
            pools: None,
            policy: PositionPolicy::AfterMaxSaliency,
        }
    }

    pub fn loo_s() -> Self {
        Self {
            kind: AttackKind::LooS,
            ..Self::loo()
        }
    }

    pub fn aa_s(pools: InsertionPools) -> Self {
        Self {
            kind: AttackKind::AaS,
            pools: Some(pools),
            policy: PositionPolicy::AfterMaxSaliency,
        }
    }

    pub fn aa_r(pools: InsertionPools) -> Self {
        Self {
            kind: AttackKind::AaR,
            ..Self::aa_s(pools)
        }
    }

    /// Prepends each of `words` to every example.
    pub fn aa_q(words: Vec<String>, n_classes: usize) -> Result<Self> {
        if let Some(w) = words.iter().find(|w| !lexicon::is_question_word(w)) {
            return Err(Error::InvalidParameter(format!("`{w}` is not a question word")));
        }
        let spec = Self {
            kind: AttackKind::AaQ,
            pools: Some(InsertionPools::uniform(words, n_classes)),
            policy: PositionPolicy::Prepend,
        };
        spec.validate(n_classes)?;
        Ok(spec)
    }

    pub fn validate(&self, n_classes: usize) -> Result<()> {
        match (&self.pools, self.kind.is_insertion()) {
            (Some(_), false) => Err(Error::InvalidParameter(format!("{} takes no pool", self.kind))),
            (None, true) => Err(Error::InvalidParameter(format!("{} requires a pool", self.kind))),
            (Some(p), true) => {
                if p.n_classes() != n_classes || (0..n_classes).any(|c| p.for_class(c).is_empty()) {
                    return Err(Error::InvalidParameter(format!(
                        "{} needs a non-empty pool for each of {n_classes} classes",
                        self.kind
                    )));
                }
                if self.kind == AttackKind::AaQ
                    && (self.policy != PositionPolicy::Prepend
                        || (0..n_classes).any(|c| p.for_class(c).iter().any(|w| !lexicon::is_question_word(w))))
                {
                    return Err(Error::InvalidParameter("AA-Q prepends question words only".into()));
                }
                Ok(())
            }
            (None, false) => Ok(()),
        }
    }
}

/// Pool-backed spec for an AA kind from a training saliency table. AA-Q
/// ignores the table and uses every question word.
pub fn pooled_spec(
    kind: AttackKind,
    table: &TypeSaliencyTable,
    vocab: &Vocab,
    k: usize,
    rare_max_freq: usize,
    opposite: &[usize],
) -> Result<AttackSpec> {
    let n = opposite.len();
    let filter = match kind {
        AttackKind::AaS => PoolFilter::StopwordNonNegation,
        AttackKind::AaR => PoolFilter::Rare { max_freq: rare_max_freq },
        AttackKind::AaQ => {
            return AttackSpec::aa_q(lexicon::QUESTION_WORDS.iter().map(|s| s.to_string()).collect(), n);
        }
        AttackKind::Loo => return Ok(AttackSpec::loo()),
        AttackKind::LooS => return Ok(AttackSpec::loo_s()),
    };
    let class_pools = (0..n)
        .map(|c| top_k_pool(table, c, k, filter, vocab).map(|p| p.words))
        .collect::<Result<Vec<_>>>()?;
    let pools = InsertionPools::opposite(&class_pools, opposite)?;
    Ok(if kind == AttackKind::AaS {
        AttackSpec::aa_s(pools)
    } else {
        AttackSpec::aa_r(pools)
    })
}

/// Removes the max-salient token. `None` for single-token documents.
pub fn apply_loo(doc: &TokenizedDoc, map: &SaliencyMap) -> Result<Option<TokenizedDoc>> {
    if doc.len() < 2 {
        return Ok(None);
    }
    Ok(Some(doc.remove(max_salient_index(map, None)?)))
}

pub fn apply_insertion(
    doc: &TokenizedDoc,
    word: &str,
    map: &SaliencyMap,
    policy: PositionPolicy,
    vocab: &Vocab,
) -> Result<TokenizedDoc> {
    if doc.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let position = match policy {
        PositionPolicy::Prepend => 0,
        PositionPolicy::AfterMaxSaliency => max_salient_index(map, None)? + 1,
    };
    Ok(doc.insert(position, word, vocab))
}

/// LOO-S admits an example iff its max-salient token is a stopword.
pub fn loo_s_admits(map: &SaliencyMap) -> Result<bool> {
    let i = max_salient_index(map, None)?;
    Ok(map.len() >= 2 && lexicon::is_stopword(&map.tokens[i]))
}

/// Perturbed copies of one example, or `None` when the attack skips it.
pub fn perturb<M: Model>(
    model: &M,
    vocab: &Vocab,
    input: &M::Input,
    gold: usize,
    spec: &AttackSpec,
) -> Result<Option<Vec<M::Input>>> {
    let doc = input.attacked();
    let map = attacked_side_map(model, input)?;
    let docs = match spec.kind {
        AttackKind::Loo => apply_loo(doc, &map)?.map(|d| vec![d]),
        AttackKind::LooS => {
            if loo_s_admits(&map)? {
                apply_loo(doc, &map)?.map(|d| vec![d])
            } else {
                None
            }
        }
        _ => {
            let pools = spec
                .pools
                .as_ref()
                .ok_or_else(|| Error::InvalidParameter(format!("{} requires a pool", spec.kind)))?;
            Some(
                pools
                    .for_class(gold)
                    .iter()
                    .map(|w| apply_insertion(doc, w, &map, spec.policy, vocab))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
    };
    Ok(docs.map(|ds| ds.into_iter().map(|d| input.with_attacked(d)).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub kind: AttackKind,
    /// Accuracy on the admitted examples before perturbation.
    pub clean_accuracy: f64,
    pub attacked_accuracy: f64,
    pub degradation_points: f64,
    pub n_examples: usize,
    pub n_skipped: usize,
}

impl AttackOutcome {
    pub fn new(kind: AttackKind, clean_accuracy: f64, attacked_accuracy: f64, n_examples: usize, n_skipped: usize) -> Self {
        Self {
            kind,
            clean_accuracy,
            attacked_accuracy,
            degradation_points: 100.0 * (clean_accuracy - attacked_accuracy),
            n_examples,
            n_skipped,
        }
    }
}

struct ExampleResult {
    clean_correct: bool,
    copies: usize,
    copies_correct: usize,
}

/// Runs one attack over `test`. Pools must come from the training split.
pub fn run_attack<M: Model>(model: &M, vocab: &Vocab, test: &TestSet<M::Input>, spec: &AttackSpec) -> Result<AttackOutcome> {
    spec.validate(model.n_classes())?;
    let results: Vec<Option<ExampleResult>> = test
        .par_iter()
        .map(|ex| {
            let Some(copies) = perturb(model, vocab, &ex.input, ex.label, spec)? else {
                return Ok(None);
            };
            let clean_correct = model.predict(&ex.input)? == ex.label;
            let mut copies_correct = 0;
            for c in &copies {
                if model.predict(c)? == ex.label {
                    copies_correct += 1;
                }
            }
            Ok(Some(ExampleResult {
                clean_correct,
                copies: copies.len(),
                copies_correct,
            }))
        })
        .collect::<Result<_>>()?;

    let (mut n, mut skipped, mut clean, mut copies, mut correct) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for r in &results {
        match r {
            None => skipped += 1,
            Some(r) => {
                n += 1;
                clean += r.clean_correct as usize;
                copies += r.copies;
                correct += r.copies_correct;
            }
        }
    }
    if n == 0 || copies == 0 {
        return Err(Error::EmptyAdmissibleSet(spec.kind.to_string()));
    }
    Ok(AttackOutcome::new(
        spec.kind,
        clean as f64 / n as f64,
        correct as f64 / copies as f64,
        n,
        skipped,
    ))
}

/// A trained model with its vocabulary, held-out data and attack specs.
pub struct AttackTarget<'a, M: Model> {
    pub name: &'a str,
    pub model: &'a M,
    pub vocab: &'a Vocab,
    pub test: &'a TestSet<M::Input>,
    pub specs: &'a [AttackSpec],
}

pub fn run_row<M: Model>(target: &AttackTarget<'_, M>) -> Result<ReportRow> {
    let mut outcomes = target
        .specs
        .iter()
        .map(|s| run_attack(target.model, target.vocab, target.test, s))
        .collect::<Result<Vec<_>>>()?;
    outcomes.sort_by_key(|o| o.kind);
    Ok(ReportRow {
        model: target.name.to_string(),
        outcomes,
    })
}

/// Two-row report, HS first.
pub fn run_suite<A: Model, B: Model>(hs: &AttackTarget<'_, A>, sie: &AttackTarget<'_, B>) -> Result<AblationReport> {
    Ok(AblationReport {
        rows: vec![run_row(hs)?, run_row(sie)?],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{HsModel, Labeled, Side};
    use crate::corpus::build_vocab;

    fn map(tokens: &[&str], scores: &[f64]) -> SaliencyMap {
        SaliencyMap {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            scores: scores.to_vec(),
            raw_scores: scores.to_vec(),
            predicted_class: 0,
            side: Side::Single,
        }
    }

    fn setup(words: &[&str]) -> (Vocab, TokenizedDoc) {
        let toks: Vec<String> = words.iter().map(|s| s.to_string()).collect();
        let vocab = build_vocab(std::slice::from_ref(&toks), 1).unwrap();
        let doc = vocab.encode(toks, None).unwrap();
        (vocab, doc)
    }

    #[test]
    fn loo_removes_max() {
        let (_, doc) = setup(&["a", "b", "c"]);
        let out = apply_loo(&doc, &map(&["a", "b", "c"], &[0.2, 0.5, 0.3])).unwrap().unwrap();
        assert_eq!(out.tokens, vec!["a", "c"]);
        let out = apply_loo(&doc, &map(&["a", "b", "c"], &[0.4, 0.2, 0.4])).unwrap().unwrap();
        assert_eq!(out.tokens, vec!["b", "c"]);
    }

    #[test]
    fn loo_skips_single_token() {
        let (_, doc) = setup(&["a"]);
        assert!(apply_loo(&doc, &map(&["a"], &[1.0])).unwrap().is_none());
    }

    #[test]
    fn insertion_positions() {
        let (vocab, doc) = setup(&["i", "hate", "x"]);
        let m = map(&["i", "hate", "x"], &[0.1, 0.7, 0.2]);
        let after = apply_insertion(&doc, "butthole", &m, PositionPolicy::AfterMaxSaliency, &vocab).unwrap();
        assert_eq!(after.tokens, vec!["i", "hate", "butthole", "x"]);
        assert_eq!(after.ids[2], vocab.id("butthole"));
        let front = apply_insertion(&doc, "what", &m, PositionPolicy::Prepend, &vocab).unwrap();
        assert_eq!(front.tokens, vec!["what", "i", "hate", "x"]);

        let (vocab, one) = setup(&["x"]);
        let out = apply_insertion(&one, "y", &map(&["x"], &[1.0]), PositionPolicy::AfterMaxSaliency, &vocab).unwrap();
        assert_eq!(out.tokens, vec!["x", "y"]);
    }

    #[test]
    fn spec_invariants() {
        assert!(AttackSpec::aa_q(vec!["what".into(), "why".into()], 2).is_ok());
        assert!(AttackSpec::aa_q(vec!["the".into()], 2).is_err());
        let mut s = AttackSpec::loo();
        s.pools = Some(InsertionPools::uniform(vec!["a".into()], 2));
        assert!(s.validate(2).is_err());
        assert!(AttackSpec::aa_s(InsertionPools::uniform(vec![], 2)).validate(2).is_err());
        let mut q = AttackSpec::aa_q(vec!["what".into()], 2).unwrap();
        q.policy = PositionPolicy::AfterMaxSaliency;
        assert!(q.validate(2).is_err());
    }

    #[test]
    fn opposite_pools() {
        let p = InsertionPools::opposite(&[vec!["a".into()], vec!["b".into()]], &HS_OPPOSITE).unwrap();
        assert_eq!(p.for_class(0), ["b".to_string()]);
        assert_eq!(p.for_class(1), ["a".to_string()]);
        assert!(InsertionPools::opposite(&[vec![], vec![]], &[0, 1]).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("loo-s".parse::<AttackKind>().unwrap(), AttackKind::LooS);
        assert_eq!("AA-Q".parse::<AttackKind>().unwrap(), AttackKind::AaQ);
        assert!("hotflip".parse::<AttackKind>().is_err());
    }

    #[test]
    fn constant_model_has_no_degradation() {
        let (vocab, _) = setup(&["a", "b", "c", "the", "what"]);
        let mut model = HsModel::new(vocab.len(), 4, 3, 0.5, 3);
        model.mlp.w2.data.iter_mut().for_each(|w| *w = 0.0);
        model.mlp.b2 = vec![1.0, 0.0];
        let docs = [vec!["a", "the"], vec!["b", "c"], vec!["the", "a", "b"]];
        let test = TestSet::new(
            docs.iter()
                .enumerate()
                .map(|(i, d)| Labeled {
                    input: vocab.encode(d.iter().map(|s| s.to_string()).collect(), None).unwrap(),
                    label: i % 2,
                })
                .collect(),
        );
        let pools = InsertionPools::uniform(vec!["a".into(), "b".into()], 2);
        for spec in [
            AttackSpec::loo(),
            AttackSpec::loo_s(),
            AttackSpec::aa_s(pools.clone()),
            AttackSpec::aa_r(pools),
            AttackSpec::aa_q(vec!["what".into()], 2).unwrap(),
        ] {
            let o = run_attack(&model, &vocab, &test, &spec).unwrap();
            assert_eq!(o.degradation_points, 0.0, "{}", spec.kind);
        }
    }
}

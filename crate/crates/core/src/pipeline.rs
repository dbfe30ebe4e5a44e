//! End-to-end helpers shared by the CLI and the acceptance tests.

use serde::{Deserialize, Serialize};

use crate::attacks::{pooled_spec, AttackKind, AttackSpec, InsertionPools};
use crate::classifier::{evaluate, train, DocPair, HsModel, Labeled, Metrics, Model, SieModel, TestSet, TrainConfig, TrainSet};
use crate::corpus::{build_vocab, split, tokenize, AnnotatedPost, TokenizedDoc, Vocab};
use crate::error::{Error, Result};
use crate::saliency::build_type_saliency_table;
use crate::sie::{AssembledPair, Split};

/// Per-stage seeds derived from one global seed by fixed offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub corpus_split: u64,
    pub hs_train: u64,
    pub sie_build: u64,
    pub sie_train: u64,
}

impl Seeds {
    pub fn from_global(seed: u64) -> Self {
        Self {
            corpus_split: seed,
            hs_train: seed.wrapping_add(1),
            sie_build: seed.wrapping_add(2),
            sie_train: seed.wrapping_add(3),
        }
    }
}

pub const DEFAULT_MIN_FREQ: usize = 2;

#[derive(Debug, Clone)]
pub struct HsData {
    pub vocab: Vocab,
    pub train: TrainSet<TokenizedDoc>,
    pub test: TestSet<TokenizedDoc>,
    /// Posts that tokenized to nothing.
    pub dropped_empty: usize,
}

fn tokenized(posts: &[AnnotatedPost]) -> (Vec<(Vec<String>, usize)>, usize) {
    let mut dropped = 0;
    let docs = posts
        .iter()
        .filter_map(|p| match tokenize(&p.text) {
            Ok(t) => Some((t, p.label())),
            Err(_) => {
                dropped += 1;
                None
            }
        })
        .collect();
    (docs, dropped)
}

/// Stratified split, tokenization and a train-only vocabulary.
pub fn prepare_hs(posts: &[AnnotatedPost], test_frac: f64, seed: u64, min_freq: usize) -> Result<HsData> {
    let (train_posts, test_posts) = split(posts, test_frac, seed)?;
    let (train_docs, d1) = tokenized(&train_posts);
    let (test_docs, d2) = tokenized(&test_posts);
    let vocab = build_vocab(&train_docs.iter().map(|(t, _)| t.as_slice()).collect::<Vec<_>>(), min_freq)?;
    let encode = |docs: Vec<(Vec<String>, usize)>| -> Result<Vec<Labeled<TokenizedDoc>>> {
        docs.into_iter()
            .enumerate()
            .map(|(i, (t, label))| {
                Ok(Labeled {
                    input: vocab.encode(t, Some(i))?,
                    label,
                })
            })
            .collect()
    };
    let train = TrainSet::new(encode(train_docs)?);
    let test = TestSet::new(encode(test_docs)?);
    Ok(HsData {
        vocab,
        train,
        test,
        dropped_empty: d1 + d2,
    })
}

#[derive(Debug, Clone)]
pub struct SieData {
    pub vocab: Vocab,
    pub train: TrainSet<DocPair>,
    pub test: TestSet<DocPair>,
}

/// Tokenizes tagged SIE pairs; the vocabulary covers both sides of the
/// training split.
pub fn prepare_sie(pairs: &[AssembledPair], min_freq: usize) -> Result<SieData> {
    let mut tok = Vec::with_capacity(pairs.len());
    for p in pairs {
        tok.push((tokenize(&p.pair.premise)?, tokenize(&p.pair.hypothesis)?, p.pair.label.index(), p.split));
    }
    let train_sides: Vec<&[String]> = tok
        .iter()
        .filter(|t| t.3 == Split::Train)
        .flat_map(|t| [t.0.as_slice(), t.1.as_slice()])
        .collect();
    if train_sides.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let vocab = build_vocab(&train_sides, min_freq)?;
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (i, (p, h, label, s)) in tok.into_iter().enumerate() {
        let ex = Labeled {
            input: DocPair {
                premise: vocab.encode(p, Some(i))?,
                hypothesis: vocab.encode(h, Some(i))?,
            },
            label,
        };
        match s {
            Split::Train => train.push(ex),
            Split::Test => test.push(ex),
        }
    }
    Ok(SieData {
        vocab,
        train: TrainSet::new(train),
        test: TestSet::new(test),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub train: Metrics,
    pub test: Metrics,
}

pub fn train_hs(data: &HsData, config: &TrainConfig) -> Result<(HsModel, TrainReport)> {
    let init = HsModel::new(data.vocab.len(), config.embed_dim, config.hidden_dim, config.init_scale, config.seed);
    let (model, train_m) = train(init, &data.train, config)?;
    let test = evaluate(&model, &data.test)?;
    Ok((model, TrainReport { train: train_m, test }))
}

pub fn train_sie(data: &SieData, config: &TrainConfig) -> Result<(SieModel, TrainReport)> {
    let init = SieModel::new(data.vocab.len(), config.embed_dim, config.hidden_dim, config.init_scale, config.seed);
    let (model, train_m) = train(init, &data.train, config)?;
    let test = evaluate(&model, &data.test)?;
    Ok((model, TrainReport { train: train_m, test }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackSettings {
    pub kinds: Vec<AttackKind>,
    /// Pool size per class for AA-S and AA-R.
    pub pool_size: usize,
    /// Largest training frequency that counts as rare.
    pub rare_max_freq: usize,
    /// Replaces the saliency-derived AA-R pool for every class.
    pub aa_r_pool: Option<Vec<String>>,
}

impl Default for AttackSettings {
    fn default() -> Self {
        Self {
            kinds: AttackKind::ALL.to_vec(),
            pool_size: 5,
            rare_max_freq: 2,
            aa_r_pool: None,
        }
    }
}

/// Specs for `settings.kinds`, with pools from the training split only.
pub fn attack_specs<M: Model>(
    model: &M,
    vocab: &Vocab,
    train: &TrainSet<M::Input>,
    settings: &AttackSettings,
    opposite: &[usize],
) -> Result<Vec<AttackSpec>> {
    let needs_table = settings
        .kinds
        .iter()
        .any(|k| *k == AttackKind::AaS || (*k == AttackKind::AaR && settings.aa_r_pool.is_none()));
    let table = if needs_table {
        build_type_saliency_table(model, train)?
    } else {
        Default::default()
    };
    let mut kinds = settings.kinds.clone();
    kinds.sort();
    kinds.dedup();
    kinds
        .into_iter()
        .map(|kind| match (&settings.aa_r_pool, kind) {
            (Some(words), AttackKind::AaR) => Ok(AttackSpec::aa_r(InsertionPools::uniform(words.clone(), model.n_classes()))),
            _ => pooled_spec(kind, &table, vocab, settings.pool_size, settings.rare_max_freq, opposite),
        })
        .collect()
}

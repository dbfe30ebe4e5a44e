//! Audit toolkit for spurious token reliance in text classifiers.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: annotated-post ingestion, label aggregation, tokenization,
//!   vocabularies, stratified splits and a synthetic corpus generator.
//! - [`classifier`]: small mean-pooled MLP classifiers (binary hate-speech
//!   and a three-way premise/hypothesis dual encoder) with exact analytic
//!   gradients.
//! - [`saliency`]: Input x Gradient attribution and per-word-type saliency
//!   tables.
//! - [`attacks`]: leave-one-out and adversarial-adding perturbations plus
//!   accuracy-degradation reports.
//! - [`sie`]: stereotype-entailment dataset construction (entail / neutral /
//!   contradict) with antonym substitution ranked by an n-gram LM.
//! - [`wordpair`]: Pearson-correlated premise/hypothesis word pairs mined
//!   from saliency maps.
//! - [`pipeline`]: glue used by the CLI and the acceptance suite.

pub mod attacks;
pub mod classifier;
pub mod corpus;
mod error;
pub mod lexicon;
pub mod pipeline;
pub mod saliency;
pub mod sie;
pub mod wordpair;

pub use attacks::{AblationReport, AttackKind, AttackOutcome, AttackSpec, InsertionPools};
pub use classifier::{
    DocPair, HsModel, Labeled, Metrics, Model, ModelInput, Side, SieModel, TestSet, TrainConfig,
    TrainSet,
};
pub use corpus::{AnnotatedPost, AnnotationRow, TokenizedDoc, Vocab};
pub use error::{Error, Result};
pub use saliency::{SaliencyMap, TypeSaliencyTable};
pub use sie::{SieLabel, SiePair};
pub use wordpair::WordPairStat;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG stream ids, one per seeded stage.
pub(crate) mod streams {
    pub const SPLIT: u64 = 1;
    pub const SYNTH: u64 = 2;
    pub const SYNTH_EMBED: u64 = 3;
    pub const INIT: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const NEUTRAL: u64 = 6;
    pub const ASSEMBLE: u64 = 7;
}

/// Deterministic RNG for one pipeline stage. `stream` separates stages that
/// share a global seed.
pub fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

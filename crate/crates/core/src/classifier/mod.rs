//! Small differentiable classifiers with exact gradients.
//!
//! Both models mean-pool token embeddings and feed a one-hidden-layer tanh
//! MLP. [`HsModel`] classifies one document into two classes; [`SieModel`]
//! encodes a premise and a hypothesis with a shared embedding and classifies
//! the combination `[u; v; |u−v|; u⊙v]` into entail / neutral / contradict.

pub mod checkpoint;
mod hs;
pub mod linalg;
mod metrics;
mod mlp;
mod sie;
mod train;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

pub use hs::{HsCache, HsModel};
pub use metrics::{evaluate, Metrics};
pub use mlp::{Mlp, MlpCache};
pub use sie::{combine, SieCache, SieModel};
pub use train::{dataset_loss, dataset_loss_gradients, train, TrainConfig};

use crate::corpus::TokenizedDoc;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Single,
    Premise,
    Hypothesis,
}

/// A model input made of one or more tokenized sides, one of which is the
/// side perturbation attacks operate on.
pub trait ModelInput: Clone + Send + Sync {
    /// Position of the attacked side in [`ModelInput::sides`].
    const ATTACKED_SIDE: usize = 0;

    fn sides(&self) -> Vec<(Side, &TokenizedDoc)>;

    fn attacked(&self) -> &TokenizedDoc;

    fn with_attacked(&self, doc: TokenizedDoc) -> Self;
}

impl ModelInput for TokenizedDoc {
    fn sides(&self) -> Vec<(Side, &TokenizedDoc)> {
        vec![(Side::Single, self)]
    }

    fn attacked(&self) -> &TokenizedDoc {
        self
    }

    fn with_attacked(&self, doc: TokenizedDoc) -> Self {
        doc
    }
}

/// Premise (post) and hypothesis (stereotype) pair. Attacks perturb the
/// premise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocPair {
    pub premise: TokenizedDoc,
    pub hypothesis: TokenizedDoc,
}

impl ModelInput for DocPair {
    fn sides(&self) -> Vec<(Side, &TokenizedDoc)> {
        vec![(Side::Premise, &self.premise), (Side::Hypothesis, &self.hypothesis)]
    }

    fn attacked(&self) -> &TokenizedDoc {
        &self.premise
    }

    fn with_attacked(&self, doc: TokenizedDoc) -> Self {
        DocPair {
            premise: doc,
            hypothesis: self.hypothesis.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeled<I> {
    pub input: I,
    pub label: usize,
}

/// Training split. Pool tables and word-pair observations only accept this
/// type, so test data cannot leak into them.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSet<I>(Vec<Labeled<I>>);

/// Held-out split used for evaluation and attacks.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet<I>(Vec<Labeled<I>>);

impl<I> TrainSet<I> {
    pub fn new(examples: Vec<Labeled<I>>) -> Self {
        Self(examples)
    }
}

impl<I> TestSet<I> {
    pub fn new(examples: Vec<Labeled<I>>) -> Self {
        Self(examples)
    }
}

impl<I> Deref for TrainSet<I> {
    type Target = [Labeled<I>];
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

impl<I> Deref for TestSet<I> {
    type Target = [Labeled<I>];
    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

/// Gradients of the logit of `target` with respect to each token embedding,
/// grouped per side in [`ModelInput::sides`] order.
pub type SideGradients = Vec<Vec<Vec<f64>>>;

pub trait Model: Sync {
    type Input: ModelInput;

    fn n_classes(&self) -> usize;

    fn embedding(&self) -> &linalg::Matrix;

    fn logits(&self, input: &Self::Input) -> Result<Vec<f64>>;

    fn probabilities(&self, input: &Self::Input) -> Result<Vec<f64>> {
        Ok(linalg::softmax(&self.logits(input)?))
    }

    fn predict(&self, input: &Self::Input) -> Result<usize> {
        Ok(linalg::argmax(&self.probabilities(input)?))
    }

    /// Exact ∂logit_target/∂e_i for every token position on every side.
    fn input_gradients(&self, input: &Self::Input, target: usize) -> Result<SideGradients>;

    /// Adds `scale · ∂CE/∂θ` into `grads` (aligned with [`Model::params`])
    /// and returns the cross-entropy of this example.
    fn accumulate_loss_gradients(
        &self,
        input: &Self::Input,
        label: usize,
        scale: f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64>;

    /// Parameter arrays in checkpoint order: embedding, w1, b1, w2, b2.
    fn params(&self) -> Vec<&[f64]>;

    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params().iter().map(|p| vec![0.0; p.len()]).collect()
    }
}

pub(crate) fn check_doc(doc: &TokenizedDoc, vocab_size: usize) -> Result<()> {
    use crate::error::Error;
    if doc.ids.is_empty() {
        return Err(Error::EmptyDocument);
    }
    if doc.ids.len() != doc.tokens.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} tokens but {} ids",
            doc.tokens.len(),
            doc.ids.len()
        )));
    }
    if let Some(&bad) = doc.ids.iter().find(|&&id| id as usize >= vocab_size) {
        return Err(Error::DimensionMismatch(format!(
            "token id {bad} outside embedding with {vocab_size} rows"
        )));
    }
    Ok(())
}

/// Cross-entropy from logits via log-sum-exp.
pub(crate) fn cross_entropy(logits: &[f64], label: usize) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    lse - logits[label]
}

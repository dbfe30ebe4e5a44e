use super::linalg::{mean_rows, Matrix};
use super::mlp::{Mlp, MlpCache};
use super::{check_doc, cross_entropy, Model, SideGradients};
use crate::corpus::TokenizedDoc;
use crate::error::{Error, Result};

/// Binary hate-speech classifier: mean-pooled embeddings into a tanh MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct HsModel {
    pub embedding: Matrix,
    pub mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct HsCache {
    pub mlp: MlpCache,
    pub n_tokens: usize,
}

pub const HS_CLASSES: usize = 2;

impl HsModel {
    pub fn new(vocab_size: usize, embed_dim: usize, hidden_dim: usize, init_scale: f64, seed: u64) -> Self {
        let mut rng = crate::stage_rng(seed, crate::streams::INIT);
        Self {
            embedding: Matrix::uniform(vocab_size, embed_dim, init_scale, &mut rng),
            mlp: Mlp::new(embed_dim, hidden_dim, HS_CLASSES, init_scale, &mut rng),
        }
    }

    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        Self::new(vocab_size, embed_dim, hidden_dim, 0.0, 0)
    }

    pub fn from_parts(embedding: Matrix, mlp: Mlp) -> Result<Self> {
        if mlp.input_dim() != embedding.cols || mlp.classes() != HS_CLASSES {
            return Err(Error::DimensionMismatch(format!(
                "embedding dim {} with MLP input {} and {} classes",
                embedding.cols,
                mlp.input_dim(),
                mlp.classes()
            )));
        }
        Ok(Self { embedding, mlp })
    }

    pub fn embed_dim(&self) -> usize {
        self.embedding.cols
    }

    pub fn forward(&self, doc: &TokenizedDoc) -> Result<(Vec<f64>, HsCache)> {
        check_doc(doc, self.embedding.rows)?;
        let pooled = mean_rows(&self.embedding, &doc.ids);
        let mlp = self.mlp.forward(pooled);
        Ok((
            mlp.probs.clone(),
            HsCache {
                mlp,
                n_tokens: doc.ids.len(),
            },
        ))
    }

    /// ∂logit_target/∂e_i. Mean pooling gives every position the same vector.
    pub fn input_gradients_from_cache(&self, cache: &HsCache, target: usize) -> Result<Vec<Vec<f64>>> {
        if target >= HS_CLASSES {
            return Err(Error::TargetOutOfRange {
                target,
                n_classes: HS_CLASSES,
            });
        }
        let mut onehot = vec![0.0; HS_CLASSES];
        onehot[target] = 1.0;
        let d_pooled = self.mlp.backward(&cache.mlp, &onehot, 1.0, None);
        let n = cache.n_tokens as f64;
        let g: Vec<f64> = d_pooled.iter().map(|x| x / n).collect();
        Ok(vec![g; cache.n_tokens])
    }
}

impl Model for HsModel {
    type Input = TokenizedDoc;

    fn n_classes(&self) -> usize {
        HS_CLASSES
    }

    fn embedding(&self) -> &Matrix {
        &self.embedding
    }

    fn logits(&self, input: &TokenizedDoc) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.1.mlp.logits)
    }

    fn input_gradients(&self, input: &TokenizedDoc, target: usize) -> Result<SideGradients> {
        let (_, cache) = self.forward(input)?;
        Ok(vec![self.input_gradients_from_cache(&cache, target)?])
    }

    fn accumulate_loss_gradients(
        &self,
        input: &TokenizedDoc,
        label: usize,
        scale: f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64> {
        if label >= HS_CLASSES {
            return Err(Error::TargetOutOfRange {
                target: label,
                n_classes: HS_CLASSES,
            });
        }
        let (probs, cache) = self.forward(input)?;
        let mut d_logits = probs;
        d_logits[label] -= 1.0;
        let (g_emb, rest) = grads.split_at_mut(1);
        let [gw1, gb1, gw2, gb2] = rest else {
            return Err(Error::DimensionMismatch("expected 5 gradient arrays".into()));
        };
        let d_pooled = self.mlp.backward(
            &cache.mlp,
            &d_logits,
            scale,
            Some([gw1.as_mut_slice(), gb1.as_mut_slice(), gw2.as_mut_slice(), gb2.as_mut_slice()]),
        );
        let d = self.embed_dim();
        let per_token = scale / cache.n_tokens as f64;
        for &id in &input.ids {
            let row = &mut g_emb[0][id as usize * d..(id as usize + 1) * d];
            for (g, &dp) in row.iter_mut().zip(&d_pooled) {
                *g += per_token * dp;
            }
        }
        Ok(cross_entropy(&cache.mlp.logits, label))
    }

    fn params(&self) -> Vec<&[f64]> {
        vec![
            &self.embedding.data,
            &self.mlp.w1.data,
            &self.mlp.b1,
            &self.mlp.w2.data,
            &self.mlp.b2,
        ]
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        vec![
            &mut self.embedding.data,
            &mut self.mlp.w1.data,
            &mut self.mlp.b1,
            &mut self.mlp.w2.data,
            &mut self.mlp.b2,
        ]
    }
}

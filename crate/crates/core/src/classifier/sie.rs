use super::linalg::{mean_rows, Matrix};
use super::mlp::{Mlp, MlpCache};
use super::{check_doc, cross_entropy, DocPair, Model, SideGradients};
use crate::error::{Error, Result};

/// Three-way premise/hypothesis classifier with a shared embedding.
/// Output order is entail, neutral, contradict.
#[derive(Debug, Clone, PartialEq)]
pub struct SieModel {
    pub embedding: Matrix,
    pub mlp: Mlp,
}

#[derive(Debug, Clone)]
pub struct SieCache {
    pub premise: Vec<f64>,
    pub hypothesis: Vec<f64>,
    pub mlp: MlpCache,
    pub n_premise: usize,
    pub n_hypothesis: usize,
}

pub const SIE_CLASSES: usize = 3;

/// `[u; v; |u−v|; u⊙v]`.
pub fn combine(u: &[f64], v: &[f64]) -> Vec<f64> {
    let mut c = Vec::with_capacity(4 * u.len());
    c.extend_from_slice(u);
    c.extend_from_slice(v);
    c.extend(u.iter().zip(v).map(|(a, b)| (a - b).abs()));
    c.extend(u.iter().zip(v).map(|(a, b)| a * b));
    c
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl SieModel {
    pub fn new(vocab_size: usize, embed_dim: usize, hidden_dim: usize, init_scale: f64, seed: u64) -> Self {
        let mut rng = crate::stage_rng(seed, crate::streams::INIT);
        Self {
            embedding: Matrix::uniform(vocab_size, embed_dim, init_scale, &mut rng),
            mlp: Mlp::new(4 * embed_dim, hidden_dim, SIE_CLASSES, init_scale, &mut rng),
        }
    }

    pub fn zeros(vocab_size: usize, embed_dim: usize, hidden_dim: usize) -> Self {
        Self::new(vocab_size, embed_dim, hidden_dim, 0.0, 0)
    }

    pub fn from_parts(embedding: Matrix, mlp: Mlp) -> Result<Self> {
        if mlp.input_dim() != 4 * embedding.cols || mlp.classes() != SIE_CLASSES {
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

    pub fn forward(&self, pair: &DocPair) -> Result<(Vec<f64>, SieCache)> {
        check_doc(&pair.premise, self.embedding.rows)?;
        check_doc(&pair.hypothesis, self.embedding.rows)?;
        let u = mean_rows(&self.embedding, &pair.premise.ids);
        let v = mean_rows(&self.embedding, &pair.hypothesis.ids);
        let mlp = self.mlp.forward(combine(&u, &v));
        Ok((
            mlp.probs.clone(),
            SieCache {
                premise: u,
                hypothesis: v,
                mlp,
                n_premise: pair.premise.ids.len(),
                n_hypothesis: pair.hypothesis.ids.len(),
            },
        ))
    }

    /// Splits ∂/∂c into ∂/∂u and ∂/∂v. The |·| term uses sign(0) = 0.
    fn split_combination_grad(&self, cache: &SieCache, dc: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.embed_dim();
        let (u, v) = (&cache.premise, &cache.hypothesis);
        let mut du = vec![0.0; d];
        let mut dv = vec![0.0; d];
        for i in 0..d {
            let s = sign(u[i] - v[i]);
            du[i] = dc[i] + dc[2 * d + i] * s + dc[3 * d + i] * v[i];
            dv[i] = dc[d + i] - dc[2 * d + i] * s + dc[3 * d + i] * u[i];
        }
        (du, dv)
    }

    pub fn input_gradients_from_cache(&self, cache: &SieCache, target: usize) -> Result<SideGradients> {
        if target >= SIE_CLASSES {
            return Err(Error::TargetOutOfRange {
                target,
                n_classes: SIE_CLASSES,
            });
        }
        let mut onehot = vec![0.0; SIE_CLASSES];
        onehot[target] = 1.0;
        let dc = self.mlp.backward(&cache.mlp, &onehot, 1.0, None);
        let (du, dv) = self.split_combination_grad(cache, &dc);
        let per = |g: &[f64], n: usize| -> Vec<Vec<f64>> {
            let row: Vec<f64> = g.iter().map(|x| x / n as f64).collect();
            vec![row; n]
        };
        Ok(vec![per(&du, cache.n_premise), per(&dv, cache.n_hypothesis)])
    }
}

impl Model for SieModel {
    type Input = DocPair;

    fn n_classes(&self) -> usize {
        SIE_CLASSES
    }

    fn embedding(&self) -> &Matrix {
        &self.embedding
    }

    fn logits(&self, input: &DocPair) -> Result<Vec<f64>> {
        Ok(self.forward(input)?.1.mlp.logits)
    }

    fn input_gradients(&self, input: &DocPair, target: usize) -> Result<SideGradients> {
        let (_, cache) = self.forward(input)?;
        self.input_gradients_from_cache(&cache, target)
    }

    fn accumulate_loss_gradients(
        &self,
        input: &DocPair,
        label: usize,
        scale: f64,
        grads: &mut [Vec<f64>],
    ) -> Result<f64> {
        if label >= SIE_CLASSES {
            return Err(Error::TargetOutOfRange {
                target: label,
                n_classes: SIE_CLASSES,
            });
        }
        let (probs, cache) = self.forward(input)?;
        let mut d_logits = probs;
        d_logits[label] -= 1.0;
        let (g_emb, rest) = grads.split_at_mut(1);
        let [gw1, gb1, gw2, gb2] = rest else {
            return Err(Error::DimensionMismatch("expected 5 gradient arrays".into()));
        };
        let dc = self.mlp.backward(
            &cache.mlp,
            &d_logits,
            scale,
            Some([gw1.as_mut_slice(), gb1.as_mut_slice(), gw2.as_mut_slice(), gb2.as_mut_slice()]),
        );
        let (du, dv) = self.split_combination_grad(&cache, &dc);
        let d = self.embed_dim();
        let mut scatter = |ids: &[u32], g: &[f64]| {
            let per_token = scale / ids.len() as f64;
            for &id in ids {
                let row = &mut g_emb[0][id as usize * d..(id as usize + 1) * d];
                for (x, &gi) in row.iter_mut().zip(g) {
                    *x += per_token * gi;
                }
            }
        };
        scatter(&input.premise.ids, &du);
        scatter(&input.hypothesis.ids, &dv);
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

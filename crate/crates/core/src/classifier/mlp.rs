use rand::Rng;

use super::linalg::{softmax, Matrix};

/// One-hidden-layer tanh MLP head: `in → hidden → classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    pub input: Vec<f64>,
    pub hidden: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Mlp {
    pub fn new<R: Rng>(input: usize, hidden: usize, classes: usize, init_scale: f64, rng: &mut R) -> Self {
        Self {
            w1: Matrix::uniform(input, hidden, init_scale, rng),
            b1: vec![0.0; hidden],
            w2: Matrix::uniform(hidden, classes, init_scale, rng),
            b2: vec![0.0; classes],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.rows
    }

    pub fn hidden_dim(&self) -> usize {
        self.w1.cols
    }

    pub fn classes(&self) -> usize {
        self.w2.cols
    }

    pub fn forward(&self, input: Vec<f64>) -> MlpCache {
        let hidden: Vec<f64> = self.w1.vec_mul(&input, &self.b1).into_iter().map(f64::tanh).collect();
        let logits = self.w2.vec_mul(&hidden, &self.b2);
        let probs = softmax(&logits);
        MlpCache {
            input,
            hidden,
            logits,
            probs,
        }
    }

    /// Backpropagates `d_logits`. Parameter gradients are added into `grads`
    /// (ordered w1, b1, w2, b2) scaled by `scale`; returns ∂/∂input.
    pub fn backward(&self, cache: &MlpCache, d_logits: &[f64], scale: f64, grads: Option<[&mut [f64]; 4]>) -> Vec<f64> {
        let h = self.hidden_dim();
        // ∂/∂hidden pre-activation
        let d_hidden: Vec<f64> = (0..h)
            .map(|j| {
                let a = cache.hidden[j];
                (1.0 - a * a) * super::linalg::dot(self.w2.row(j), d_logits)
            })
            .collect();
        if let Some([gw1, gb1, gw2, gb2]) = grads {
            for (j, &a) in cache.hidden.iter().enumerate() {
                for (k, &dl) in d_logits.iter().enumerate() {
                    gw2[j * self.classes() + k] += scale * a * dl;
                }
            }
            for (k, &dl) in d_logits.iter().enumerate() {
                gb2[k] += scale * dl;
            }
            for (i, &x) in cache.input.iter().enumerate() {
                if x == 0.0 {
                    continue;
                }
                let row = &mut gw1[i * h..(i + 1) * h];
                for (g, &dh) in row.iter_mut().zip(&d_hidden) {
                    *g += scale * x * dh;
                }
            }
            for (g, &dh) in gb1.iter_mut().zip(&d_hidden) {
                *g += scale * dh;
            }
        }
        self.w1.mul_vec(&d_hidden)
    }
}

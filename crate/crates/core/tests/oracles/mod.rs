//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls the routine it is checking.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use spurio_core::classifier::linalg::Matrix;
use spurio_core::classifier::{dataset_loss, DocPair, HsModel, Labeled, Model, SieModel};
use spurio_core::TokenizedDoc;

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor for relative errors. Near-zero gradients otherwise turn
/// round-off into huge ratios.
pub const REL_FLOOR: f64 = 1e-6;

pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

pub fn doc(ids: Vec<u32>) -> TokenizedDoc {
    TokenizedDoc {
        tokens: ids.iter().map(|i| format!("w{i}")).collect(),
        ids,
        source: None,
    }
}

pub fn random_doc<R: Rng>(rng: &mut R, vocab_size: usize, max_len: usize) -> TokenizedDoc {
    let n = rng.gen_range(1..=max_len);
    doc((0..n).map(|_| rng.gen_range(0..vocab_size as u32)).collect())
}

/// A premise/hypothesis pair whose mean embeddings cannot coincide, which
/// keeps `|u − v|` away from its kink.
pub fn random_pair<R: Rng>(rng: &mut R, vocab_size: usize, max_len: usize) -> DocPair {
    loop {
        let premise = random_doc(rng, vocab_size, max_len);
        let hypothesis = random_doc(rng, vocab_size, max_len);
        let mut a = premise.ids.clone();
        let mut b = hypothesis.ids.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return DocPair { premise, hypothesis };
        }
    }
}

fn expanded(embedding: &Matrix, ids: &[u32]) -> Matrix {
    let mut m = Matrix::zeros(ids.len(), embedding.cols);
    for (r, &id) in ids.iter().enumerate() {
        m.row_mut(r).copy_from_slice(embedding.row(id as usize));
    }
    m
}

/// Central differences of `f` with respect to every entry of `m`.
fn fd_matrix(m: &Matrix, f: impl Fn(&Matrix) -> f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; m.cols]; m.rows];
    let mut work = m.clone();
    for r in 0..m.rows {
        for c in 0..m.cols {
            let i = r * m.cols + c;
            let orig = work.data[i];
            work.data[i] = orig + FD_STEP;
            let up = f(&work);
            work.data[i] = orig - FD_STEP;
            let down = f(&work);
            work.data[i] = orig;
            out[r][c] = (up - down) / (2.0 * FD_STEP);
        }
    }
    out
}

/// ∂logit_target/∂e_i per position, by finite differences on a model whose
/// embedding has one private row per position.
pub fn fd_input_gradients_hs(model: &HsModel, input: &TokenizedDoc, target: usize) -> Vec<Vec<f64>> {
    let e = expanded(&model.embedding, &input.ids);
    let local = doc((0..input.ids.len() as u32).collect());
    fd_matrix(&e, |m| {
        let probe = HsModel::from_parts(m.clone(), model.mlp.clone()).unwrap();
        probe.logits(&local).unwrap()[target]
    })
}

/// Same for the dual encoder; returns premise then hypothesis gradients.
pub fn fd_input_gradients_sie(model: &SieModel, input: &DocPair, target: usize) -> Vec<Vec<Vec<f64>>> {
    let np = input.premise.ids.len();
    let nh = input.hypothesis.ids.len();
    let ids: Vec<u32> = input.premise.ids.iter().chain(&input.hypothesis.ids).copied().collect();
    let e = expanded(&model.embedding, &ids);
    let local = DocPair {
        premise: doc((0..np as u32).collect()),
        hypothesis: doc((np as u32..(np + nh) as u32).collect()),
    };
    let all = fd_matrix(&e, |m| {
        let probe = SieModel::from_parts(m.clone(), model.mlp.clone()).unwrap();
        probe.logits(&local).unwrap()[target]
    });
    let (p, h) = all.split_at(np);
    vec![p.to_vec(), h.to_vec()]
}

/// Central differences of the regularized dataset loss for every parameter.
pub fn fd_param_gradients<M: Model + Clone>(model: &M, examples: &[Labeled<M::Input>], l2: f64) -> Vec<Vec<f64>> {
    let mut work = model.clone();
    let shapes: Vec<usize> = model.params().iter().map(|p| p.len()).collect();
    let mut out = Vec::new();
    for (a, &len) in shapes.iter().enumerate() {
        let mut g = vec![0.0; len];
        for (k, gk) in g.iter_mut().enumerate() {
            let orig = work.params()[a][k];
            work.params_mut()[a][k] = orig + FD_STEP;
            let up = dataset_loss(&work, examples, l2).unwrap();
            work.params_mut()[a][k] = orig - FD_STEP;
            let down = dataset_loss(&work, examples, l2).unwrap();
            work.params_mut()[a][k] = orig;
            *gk = (up - down) / (2.0 * FD_STEP);
        }
        out.push(g);
    }
    out
}

pub fn max_rel_err(analytic: &[Vec<f64>], numeric: &[Vec<f64>]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        assert_eq!(a.len(), n.len());
        for (&x, &y) in a.iter().zip(n) {
            worst = worst.max(rel_err(x, y));
        }
    }
    worst
}

/// Raw Input x Gradient by an explicit dot product of the embedding row and
/// the per-position gradient of the predicted logit.
pub fn raw_saliency<M: Model>(model: &M, side_ids: &[&[u32]], grads: &[Vec<Vec<f64>>]) -> Vec<Vec<f64>> {
    let e = model.embedding();
    side_ids
        .iter()
        .zip(grads)
        .map(|(ids, g)| {
            ids.iter()
                .zip(g)
                .map(|(&id, gi)| {
                    let row = &e.data[id as usize * e.cols..(id as usize + 1) * e.cols];
                    let mut s = 0.0;
                    for k in 0..e.cols {
                        s += row[k] * gi[k];
                    }
                    s
                })
                .collect()
        })
        .collect()
}

/// Token-level Levenshtein distance.
pub fn edit_distance(a: &[String], b: &[String]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Cosine between the mean vectors of two phrases, read straight from raw
/// `(word, vector)` rows. `None` when a phrase has no known word.
pub fn phrase_cosine(rows: &[(String, Vec<f64>)], a: &str, b: &str) -> Option<f64> {
    let mean = |p: &str| -> Option<Vec<f64>> {
        let vs: Vec<&Vec<f64>> = p
            .split_whitespace()
            .filter_map(|w| rows.iter().find(|(x, _)| *x == w.to_lowercase()).map(|(_, v)| v))
            .collect();
        if vs.is_empty() {
            return None;
        }
        let mut m = vec![0.0; vs[0].len()];
        for v in &vs {
            for (mi, vi) in m.iter_mut().zip(v.iter()) {
                *mi += vi / vs.len() as f64;
            }
        }
        Some(m)
    };
    let (x, y) = (mean(a)?, mean(b)?);
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    Some(if nx == 0.0 || ny == 0.0 { 0.0 } else { dot / (nx * ny) })
}

/// Result row of the brute-force miner.
#[derive(Debug, Clone, PartialEq)]
pub struct BrutePair {
    pub premise_word: String,
    pub hypothesis_word: String,
    pub r: f64,
    pub support: usize,
}

/// Per-example (premise, hypothesis) normalized saliency maps in; every
/// co-occurring word pair scanned directly.
pub type ExampleMaps = (Vec<String>, Vec<f64>, Vec<String>, Vec<f64>);

pub fn brute_force_mine(
    examples: &[ExampleMaps],
    min_support: usize,
    min_r: f64,
) -> Vec<BrutePair> {
    let pw: BTreeSet<&String> = examples.iter().flat_map(|e| e.0.iter()).collect();
    let hw: BTreeSet<&String> = examples.iter().flat_map(|e| e.2.iter()).collect();
    let max_of = |toks: &[String], scores: &[f64], w: &str| -> Option<f64> {
        toks.iter()
            .zip(scores)
            .filter(|(t, _)| t.as_str() == w)
            .map(|(_, &s)| s)
            .reduce(f64::max)
    };
    let mut out = Vec::new();
    for p in &pw {
        for h in &hw {
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (pt, ps, ht, hs) in examples {
                if let (Some(x), Some(y)) = (max_of(pt, ps, p), max_of(ht, hs, h)) {
                    xs.push(x);
                    ys.push(y);
                }
            }
            if xs.len() <= min_support {
                continue;
            }
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            if vx == 0.0 || vy == 0.0 {
                continue;
            }
            let r = (cov / (vx.sqrt() * vy.sqrt())).clamp(-1.0, 1.0);
            if r.abs() >= min_r {
                out.push(BrutePair {
                    premise_word: p.to_string(),
                    hypothesis_word: h.to_string(),
                    r,
                    support: xs.len(),
                });
            }
        }
    }
    out
}

/// Keyed view for order-insensitive comparison.
pub fn by_key(pairs: &[BrutePair]) -> BTreeMap<(String, String), (f64, usize)> {
    pairs
        .iter()
        .map(|p| ((p.premise_word.clone(), p.hypothesis_word.clone()), (p.r, p.support)))
        .collect()
}

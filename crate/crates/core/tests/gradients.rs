mod oracles;

use oracles::*;
use rand::Rng;
use spurio_core::classifier::{dataset_loss_gradients, DocPair, HsModel, Labeled, Model, SieModel};
use spurio_core::{stage_rng, TokenizedDoc};

const V: usize = 8;
const D: usize = 4;
const H: usize = 5;
const TOL: f64 = 1e-4;

fn hs_model(seed: u64, rng: &mut impl Rng) -> HsModel {
    HsModel::new(V, D, H, rng.gen_range(0.3..1.5), seed)
}

fn sie_model(seed: u64, rng: &mut impl Rng) -> SieModel {
    SieModel::new(V, D, H, rng.gen_range(0.3..1.5), seed)
}

#[test]
fn hs_input_gradients_match_finite_differences() {
    let mut rng = stage_rng(11, 0);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let m = hs_model(t, &mut rng);
        let x = random_doc(&mut rng, V, 6);
        let target = rng.gen_range(0..2);
        let analytic = m.input_gradients(&x, target).unwrap().remove(0);
        worst = worst.max(max_rel_err(&analytic, &fd_input_gradients_hs(&m, &x, target)));
    }
    eprintln!("max relative error {worst:e}");
    assert!(worst < TOL, "max relative error {worst:e}");
}

#[test]
fn sie_input_gradients_match_finite_differences() {
    let mut rng = stage_rng(12, 0);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let m = sie_model(t, &mut rng);
        let x = random_pair(&mut rng, V, 5);
        let target = rng.gen_range(0..3);
        let analytic = m.input_gradients(&x, target).unwrap();
        let numeric = fd_input_gradients_sie(&m, &x, target);
        for side in 0..2 {
            worst = worst.max(max_rel_err(&analytic[side], &numeric[side]));
        }
    }
    eprintln!("max relative error {worst:e}");
    assert!(worst < TOL, "max relative error {worst:e}");
}

fn hs_batch(rng: &mut impl Rng) -> Vec<Labeled<TokenizedDoc>> {
    (0..5)
        .map(|_| Labeled {
            input: random_doc(rng, V, 6),
            label: rng.gen_range(0..2),
        })
        .collect()
}

fn sie_batch(rng: &mut impl Rng) -> Vec<Labeled<DocPair>> {
    (0..5)
        .map(|_| Labeled {
            input: random_pair(rng, V, 5),
            label: rng.gen_range(0..3),
        })
        .collect()
}

#[test]
fn hs_parameter_gradients_match_finite_differences() {
    let mut rng = stage_rng(13, 0);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let m = hs_model(t, &mut rng);
        let batch = hs_batch(&mut rng);
        let l2 = rng.gen_range(0.0..1e-2);
        let (_, analytic) = dataset_loss_gradients(&m, &batch, l2).unwrap();
        worst = worst.max(max_rel_err(&analytic, &fd_param_gradients(&m, &batch, l2)));
    }
    eprintln!("max relative error {worst:e}");
    assert!(worst < TOL, "max relative error {worst:e}");
}

#[test]
fn sie_parameter_gradients_match_finite_differences() {
    let mut rng = stage_rng(14, 0);
    let mut worst: f64 = 0.0;
    for t in 0..40 {
        let m = sie_model(t, &mut rng);
        let batch = sie_batch(&mut rng);
        let l2 = rng.gen_range(0.0..1e-2);
        let (_, analytic) = dataset_loss_gradients(&m, &batch, l2).unwrap();
        worst = worst.max(max_rel_err(&analytic, &fd_param_gradients(&m, &batch, l2)));
    }
    eprintln!("max relative error {worst:e}");
    assert!(worst < TOL, "max relative error {worst:e}");
}

#[test]
fn rows_for_absent_tokens_get_only_l2_gradient() {
    let mut rng = stage_rng(15, 0);
    let m = hs_model(3, &mut rng);
    let batch = vec![Labeled {
        input: doc(vec![1, 2]),
        label: 1,
    }];
    let l2 = 1e-3;
    let (_, g) = dataset_loss_gradients(&m, &batch, l2).unwrap();
    let e = &m.params()[0];
    for k in 0..D {
        let i = 5 * D + k;
        assert!((g[0][i] - 2.0 * l2 * e[i]).abs() < 1e-15);
    }
}

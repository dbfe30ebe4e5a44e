use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::AnnotatedPost;
use crate::error::{Error, Result};

/// Stratified, seeded train/test partition of annotated posts by HS label.
pub fn split(posts: &[AnnotatedPost], test_frac: f64, seed: u64) -> Result<(Vec<AnnotatedPost>, Vec<AnnotatedPost>)> {
    stratified_split(posts, |p| p.label(), test_frac, seed)
}

/// Partitions `items` so that every class contributes `round(test_frac · n_c)`
/// members to the test side (clamped to keep at least one on each side).
/// Both sides keep input order.
pub fn stratified_split<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> usize,
    test_frac: f64,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>)> {
    if !(test_frac > 0.0 && test_frac < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_frac must be in (0, 1), got {test_frac}"
        )));
    }
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, item) in items.iter().enumerate() {
        by_class.entry(label(item)).or_default().push(i);
    }
    let mut rng = crate::stage_rng(seed, crate::streams::SPLIT);
    let mut is_test = vec![false; items.len()];
    for (&class, members) in &by_class {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
            });
        }
        let n = members.len();
        let n_test = ((test_frac * n as f64).round() as usize).clamp(1, n - 1);
        let mut shuffled = members.clone();
        shuffled.shuffle(&mut rng);
        for &i in &shuffled[..n_test] {
            is_test[i] = true;
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (item, t) in items.iter().zip(is_test) {
        if t {
            test.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn posts(n: usize, n_hs: usize) -> Vec<AnnotatedPost> {
        (0..n)
            .map(|i| AnnotatedPost {
                text: format!("post {i}"),
                offensive_frac: 0.0,
                intent_frac: 0.0,
                target_groups: vec![],
                stereotypes: vec![],
                hs_label: i < n_hs,
            })
            .collect()
    }

    #[test]
    fn stratified_counts() {
        let p = posts(100, 40);
        let (train, test) = split(&p, 0.25, 7).unwrap();
        assert_eq!(train.len(), 75);
        assert_eq!(test.len(), 25);
        // recount independently of the implementation
        let hs_test = test.iter().filter(|p| p.hs_label).count();
        assert_eq!(hs_test, 10);
    }

    #[test]
    fn deterministic() {
        let p = posts(100, 40);
        assert_eq!(split(&p, 0.25, 7).unwrap(), split(&p, 0.25, 7).unwrap());
        assert_ne!(split(&p, 0.25, 7).unwrap().1, split(&p, 0.25, 8).unwrap().1);
    }

    #[test]
    fn bad_fraction_and_tiny_class() {
        let p = posts(100, 40);
        assert!(split(&p, 0.0, 1).is_err());
        assert!(split(&p, 1.0, 1).is_err());
        let p = posts(10, 1);
        assert!(matches!(split(&p, 0.5, 1), Err(Error::ClassTooSmall { class: 1, count: 1 })));
    }

    proptest! {
        #[test]
        fn exact_partition(n in 4usize..200, hs_frac in 0.1f64..0.9, test_frac in 0.05f64..0.95, seed in 0u64..1000) {
            let n_hs = ((n as f64 * hs_frac) as usize).clamp(2, n - 2);
            let p = posts(n, n_hs);
            let (train, test) = split(&p, test_frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), n);
            let mut all: Vec<&str> = train.iter().chain(&test).map(|p| p.text.as_str()).collect();
            all.sort();
            all.dedup();
            prop_assert_eq!(all.len(), n);
        }
    }
}

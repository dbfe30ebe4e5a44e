//! Premise/hypothesis word pairs whose saliencies correlate across training
//! examples.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{DocPair, Model, TrainSet};
use crate::error::{Error, Result};
use crate::saliency::input_x_gradient;
use crate::sie::SieLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub premise_saliency: f64,
    pub hypothesis_saliency: f64,
    pub class: usize,
    pub example_id: usize,
}

/// `(premise word, hypothesis word)` → one observation per example in which
/// both occur, in example order.
pub type PairObservations = BTreeMap<(String, String), Vec<Observation>>;

/// Word type → maximum normalized score over its occurrences.
fn max_by_type(tokens: &[String], scores: &[f64]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for (t, &s) in tokens.iter().zip(scores) {
        out.entry(t.clone()).and_modify(|m| *m = m.max(s)).or_insert(s);
    }
    out
}

pub fn add_example(obs: &mut PairObservations, premise: &BTreeMap<String, f64>, hypothesis: &BTreeMap<String, f64>, class: usize, example_id: usize) {
    for (p, &ps) in premise {
        for (h, &hs) in hypothesis {
            obs.entry((p.clone(), h.clone())).or_default().push(Observation {
                premise_saliency: ps,
                hypothesis_saliency: hs,
                class,
                example_id,
            });
        }
    }
}

/// Saliency observations over the training split. Example ids are
/// positions in `train`.
pub fn collect_observations<M: Model<Input = DocPair>>(model: &M, train: &TrainSet<DocPair>) -> Result<PairObservations> {
    let per_example: Vec<(BTreeMap<String, f64>, BTreeMap<String, f64>)> = train
        .par_iter()
        .map(|ex| {
            let maps = input_x_gradient(model, &ex.input)?;
            Ok((
                max_by_type(&maps[0].tokens, &maps[0].scores),
                max_by_type(&maps[1].tokens, &maps[1].scores),
            ))
        })
        .collect::<Result<_>>()?;
    let mut obs = PairObservations::new();
    for (id, ((p, h), ex)) in per_example.iter().zip(train.iter()).enumerate() {
        add_example(&mut obs, p, h, ex.label, id);
    }
    Ok(obs)
}

/// Sample Pearson correlation. `None` for fewer than two points or zero
/// variance in either input.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPairStat {
    pub premise_word: String,
    pub hypothesis_word: String,
    pub r: f64,
    pub support: usize,
    /// Supporting examples per SIE class.
    pub class_histogram: [usize; 3],
    pub unique_class: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MineResult {
    pub stats: Vec<WordPairStat>,
    /// Pairs above the support threshold whose r is undefined.
    pub zero_variance: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MineConfig {
    /// Pairs need strictly more supporting examples than this.
    pub min_support: usize,
    pub min_r: f64,
}

impl Default for MineConfig {
    fn default() -> Self {
        Self {
            min_support: 3,
            min_r: 0.7,
        }
    }
}

/// Pairs with support > `min_support` and |r| ≥ `min_r`, sorted by |r|
/// descending, then support descending, then words.
pub fn mine(obs: &PairObservations, config: MineConfig) -> Result<MineResult> {
    if config.min_support < 2 {
        return Err(Error::InvalidParameter("min_support must be >= 2".into()));
    }
    let entries: Vec<(&(String, String), &Vec<Observation>)> =
        obs.iter().filter(|(_, o)| o.len() > config.min_support).collect();
    let scored: Vec<Option<WordPairStat>> = entries
        .par_iter()
        .map(|((p, h), o)| {
            let xs: Vec<f64> = o.iter().map(|x| x.premise_saliency).collect();
            let ys: Vec<f64> = o.iter().map(|x| x.hypothesis_saliency).collect();
            let r = pearson(&xs, &ys)?;
            let mut hist = [0usize; 3];
            for x in o.iter() {
                hist[x.class.min(2)] += 1;
            }
            let nonzero: Vec<usize> = (0..3).filter(|&c| hist[c] > 0).collect();
            Some(WordPairStat {
                premise_word: p.clone(),
                hypothesis_word: h.clone(),
                r,
                support: o.len(),
                class_histogram: hist,
                unique_class: (nonzero.len() == 1).then(|| nonzero[0]),
            })
        })
        .collect();
    let zero_variance = scored.iter().filter(|s| s.is_none()).count();
    let mut stats: Vec<WordPairStat> = scored.into_iter().flatten().filter(|s| s.r.abs() >= config.min_r).collect();
    stats.sort_by(|a, b| {
        b.r.abs()
            .total_cmp(&a.r.abs())
            .then_with(|| b.support.cmp(&a.support))
            .then_with(|| a.premise_word.cmp(&b.premise_word))
            .then_with(|| a.hypothesis_word.cmp(&b.hypothesis_word))
    });
    Ok(MineResult { stats, zero_variance })
}

pub fn class_unique(stats: &[WordPairStat]) -> Vec<WordPairStat> {
    stats.iter().filter(|s| s.unique_class.is_some()).cloned().collect()
}

fn class_name(c: Option<usize>) -> &'static str {
    c.and_then(SieLabel::from_index).map_or("", SieLabel::name)
}

/// CSV with a header row, also when `stats` is empty.
pub fn write_csv(path: &Path, stats: &[WordPairStat]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "premise_word",
        "hypothesis_word",
        "r",
        "support",
        "entail",
        "neutral",
        "contradict",
        "unique_class",
    ])?;
    for s in stats {
        w.write_record([
            s.premise_word.clone(),
            s.hypothesis_word.clone(),
            s.r.to_string(),
            s.support.to_string(),
            s.class_histogram[0].to_string(),
            s.class_histogram[1].to_string(),
            s.class_histogram[2].to_string(),
            class_name(s.unique_class).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Top-`n` pairs followed by the top-`n` class-unique pairs.
pub fn summary(result: &MineResult, top_n: usize) -> String {
    let mut out = String::new();
    let line = |out: &mut String, s: &WordPairStat| {
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:>7.3} {:>7} {:>3}/{:>3}/{:>3} {}",
            s.premise_word,
            s.hypothesis_word,
            s.r,
            s.support,
            s.class_histogram[0],
            s.class_histogram[1],
            s.class_histogram[2],
            class_name(s.unique_class)
        );
    };
    let _ = writeln!(out, "{} pairs ({} dropped for zero variance)", result.stats.len(), result.zero_variance);
    let _ = writeln!(out, "\nTop {top_n} pairs (premise, hypothesis, r, support, e/n/c, unique)");
    for s in result.stats.iter().take(top_n) {
        line(&mut out, s);
    }
    let unique = class_unique(&result.stats);
    let _ = writeln!(out, "\nClass-unique pairs ({}, top {top_n} shown)", unique.len());
    for s in unique.iter().take(top_n) {
        line(&mut out, s);
    }
    out
}

use std::collections::{BTreeMap, HashMap};

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embedding::{cosine, EmbeddingTable};
use super::lexicon::AntonymLexicon;
use super::lm::{LmConfig, NgramLm};
use super::{Provenance, SieLabel, SiePair, StereotypeBank};
use crate::corpus::{stratified_split, tokenize, AnnotatedPost};
use crate::error::{Error, Result};
use crate::lexicon;
use crate::streams;

/// One entail pair per (HS post, distinct stereotype).
pub fn build_entailment(posts: &[AnnotatedPost]) -> Vec<SiePair> {
    posts
        .iter()
        .filter(|p| p.hs_label)
        .flat_map(|p| {
            p.stereotypes.iter().map(|s| SiePair {
                premise: p.text.clone(),
                hypothesis: s.clone(),
                label: SieLabel::Entail,
                provenance: Provenance::HumanStereotype,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NeutralOutcome {
    pub pairs: Vec<SiePair>,
    pub random: usize,
    pub low_similarity: usize,
    /// HS posts with no stereotype below the similarity threshold.
    pub skipped: usize,
}

type GroupVectors = Vec<(String, Vec<f64>)>;

/// Non-HS posts get a uniformly random stereotype; HS posts get one whose
/// every source group has cosine below `sim_threshold` with every target
/// group of the post. Groups without embeddings never qualify.
pub fn build_neutral(
    posts: &[AnnotatedPost],
    bank: &StereotypeBank,
    emb: &EmbeddingTable,
    sim_threshold: f64,
    seed: u64,
) -> Result<NeutralOutcome> {
    if bank.is_empty() {
        return Err(Error::EmptyClass("neutral (empty stereotype bank)".into()));
    }
    let mut vectors: HashMap<String, Option<Vec<f64>>> = HashMap::new();
    let mut vector = |g: &str| -> Option<Vec<f64>> {
        vectors.entry(g.to_string()).or_insert_with(|| emb.phrase_vector(g).ok()).clone()
    };
    // per bank entry: every group with its vector, or None if any is missing
    let bank_vectors: Vec<Option<GroupVectors>> = bank
        .entries
        .iter()
        .map(|e| {
            if e.groups.is_empty() {
                return None;
            }
            e.groups.iter().map(|g| vector(g).map(|v| (g.clone(), v))).collect()
        })
        .collect();

    let mut rng = crate::stage_rng(seed, streams::NEUTRAL);
    let mut out = NeutralOutcome::default();
    for post in posts {
        if !post.hs_label {
            let e = &bank.entries[rng.gen_range(0..bank.len())];
            out.pairs.push(SiePair {
                premise: post.text.clone(),
                hypothesis: e.text.clone(),
                label: SieLabel::Neutral,
                provenance: Provenance::RandomAssignment,
            });
            out.random += 1;
            continue;
        }
        let post_vectors: Option<Vec<Vec<f64>>> = if post.target_groups.is_empty() {
            None
        } else {
            post.target_groups.iter().map(|g| vector(g)).collect()
        };
        let Some(post_vectors) = post_vectors else {
            out.skipped += 1;
            continue;
        };
        let candidates: Vec<(usize, f64)> = bank_vectors
            .iter()
            .enumerate()
            .filter_map(|(i, groups)| {
                let groups = groups.as_ref()?;
                let max = groups
                    .iter()
                    .flat_map(|(_, gv)| post_vectors.iter().map(move |pv| cosine(gv, pv)))
                    .fold(f64::NEG_INFINITY, f64::max);
                (max < sim_threshold).then_some((i, max))
            })
            .collect();
        let Some(&(i, max_similarity)) = candidates.choose(&mut rng) else {
            out.skipped += 1;
            continue;
        };
        let entry = &bank.entries[i];
        out.pairs.push(SiePair {
            premise: post.text.clone(),
            hypothesis: entry.text.clone(),
            label: SieLabel::Neutral,
            provenance: Provenance::LowSimilarityAssignment {
                source_groups: entry.groups.iter().cloned().collect(),
                max_similarity,
            },
        });
        out.low_similarity += 1;
    }
    Ok(out)
}

/// Every `(position, original, antonym)` over non-stopword positions.
pub fn antonym_candidates(tokens: &[String], lexicon: &AntonymLexicon) -> Vec<(usize, String, String)> {
    let mut out = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        if lexicon::is_stopword(t) {
            continue;
        }
        if let Some(ants) = lexicon.antonyms(t) {
            out.extend(ants.iter().map(|a| (i, t.clone(), a.clone())));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    pub position: usize,
    pub orig_word: String,
    pub new_word: String,
    pub tokens: Vec<String>,
    pub log_prob: f64,
}

/// Highest-scoring single antonym substitution. Ties go to the lowest
/// position, then the lexicographically smallest antonym.
pub fn best_substitution(tokens: &[String], lexicon: &AntonymLexicon, lm: &NgramLm) -> Option<Substitution> {
    let mut best: Option<Substitution> = None;
    // candidates arrive in (position, antonym) order, so strict > keeps the
    // tie-break
    for (position, orig_word, new_word) in antonym_candidates(tokens, lexicon) {
        let mut sub = tokens.to_vec();
        sub[position] = new_word.clone();
        let log_prob = lm.score_sentence(&sub);
        if best.as_ref().is_none_or(|b| log_prob > b.log_prob) {
            best = Some(Substitution {
                position,
                orig_word,
                new_word,
                tokens: sub,
                log_prob,
            });
        }
    }
    best
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContradictOutcome {
    pub pairs: Vec<SiePair>,
    /// Entail pairs whose stereotype had no substitutable word.
    pub skipped: usize,
}

/// One contradict pair per entail pair whose stereotype has an antonym
/// candidate.
pub fn build_contradiction(entail: &[SiePair], lm: &NgramLm, lexicon: &AntonymLexicon) -> ContradictOutcome {
    let mut distinct: Vec<&str> = entail.iter().map(|p| p.hypothesis.as_str()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let best: HashMap<&str, Option<Substitution>> = distinct
        .par_iter()
        .map(|&h| {
            let sub = tokenize(h).ok().and_then(|toks| best_substitution(&toks, lexicon, lm));
            (h, sub)
        })
        .collect();

    let mut out = ContradictOutcome::default();
    for p in entail {
        match &best[p.hypothesis.as_str()] {
            Some(sub) => out.pairs.push(SiePair {
                premise: p.premise.clone(),
                hypothesis: sub.tokens.join(" "),
                label: SieLabel::Contradict,
                provenance: Provenance::AntonymSubstitution {
                    orig_word: sub.orig_word.clone(),
                    new_word: sub.new_word.clone(),
                    position: sub.position,
                    source_hypothesis: p.hypothesis.clone(),
                },
            }),
            None => out.skipped += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssembledPair {
    #[serde(flatten)]
    pub pair: SiePair,
    pub split: Split,
}

/// Downsamples every class to the size of the smallest, shuffles, and tags
/// a stratified train/test split.
pub fn assemble_dataset(
    entail: Vec<SiePair>,
    neutral: Vec<SiePair>,
    contradict: Vec<SiePair>,
    test_frac: f64,
    seed: u64,
) -> Result<Vec<AssembledPair>> {
    let classes = [entail, neutral, contradict];
    for (label, pairs) in SieLabel::ALL.iter().zip(&classes) {
        if pairs.is_empty() {
            return Err(Error::EmptyClass(label.to_string()));
        }
    }
    let smallest = classes.iter().map(Vec::len).min().unwrap();
    let mut rng = crate::stage_rng(seed, streams::ASSEMBLE);
    let mut pooled: Vec<SiePair> = Vec::with_capacity(3 * smallest);
    for pairs in classes {
        let mut keep = index::sample(&mut rng, pairs.len(), smallest).into_vec();
        keep.sort_unstable();
        let mut pairs: Vec<Option<SiePair>> = pairs.into_iter().map(Some).collect();
        pooled.extend(keep.into_iter().map(|i| pairs[i].take().unwrap()));
    }
    pooled.shuffle(&mut rng);

    let ids: Vec<usize> = (0..pooled.len()).collect();
    let (_, test) = stratified_split(&ids, |&i| pooled[i].label.index(), test_frac, seed)?;
    let mut is_test = vec![false; pooled.len()];
    for i in test {
        is_test[i] = true;
    }
    Ok(pooled
        .into_iter()
        .zip(is_test)
        .map(|(pair, t)| AssembledPair {
            pair,
            split: if t { Split::Test } else { Split::Train },
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SieBuildConfig {
    pub sim_threshold: f64,
    pub test_frac: f64,
    pub seed: u64,
    pub lm: LmConfig,
}

impl Default for SieBuildConfig {
    fn default() -> Self {
        Self {
            sim_threshold: 0.3,
            test_frac: 0.2,
            seed: 0,
            lm: LmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildStats {
    pub entail: usize,
    pub neutral_random: usize,
    pub neutral_low_similarity: usize,
    pub neutral_skipped_hs_posts: usize,
    pub contradict: usize,
    pub contradict_skipped: usize,
    /// Per-class counts after balancing.
    pub assembled: BTreeMap<SieLabel, usize>,
    pub train: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SieBuild {
    pub pairs: Vec<AssembledPair>,
    pub stats: BuildStats,
}

/// Full build. The LM is trained on the tokenized stereotype bank plus
/// `extra_lm_sentences`.
pub fn build_sie(
    posts: &[AnnotatedPost],
    lexicon: &AntonymLexicon,
    emb: &EmbeddingTable,
    extra_lm_sentences: &[Vec<String>],
    config: &SieBuildConfig,
) -> Result<SieBuild> {
    let bank = StereotypeBank::from_posts(posts);
    let mut lm_corpus: Vec<Vec<String>> = bank.entries.iter().filter_map(|e| tokenize(&e.text).ok()).collect();
    lm_corpus.extend(extra_lm_sentences.iter().cloned());
    let lm = NgramLm::train(&lm_corpus, config.lm.clone())?;

    let entail = build_entailment(posts);
    let neutral = build_neutral(posts, &bank, emb, config.sim_threshold, config.seed)?;
    let contradict = build_contradiction(&entail, &lm, lexicon);
    let mut stats = BuildStats {
        entail: entail.len(),
        neutral_random: neutral.random,
        neutral_low_similarity: neutral.low_similarity,
        neutral_skipped_hs_posts: neutral.skipped,
        contradict: contradict.pairs.len(),
        contradict_skipped: contradict.skipped,
        assembled: BTreeMap::new(),
        train: 0,
        test: 0,
    };
    let pairs = assemble_dataset(entail, neutral.pairs, contradict.pairs, config.test_frac, config.seed)?;
    for p in &pairs {
        *stats.assembled.entry(p.pair.label).or_default() += 1;
        match p.split {
            Split::Train => stats.train += 1,
            Split::Test => stats.test += 1,
        }
    }
    Ok(SieBuild { pairs, stats })
}

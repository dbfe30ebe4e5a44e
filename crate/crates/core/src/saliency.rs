//! Input x Gradient saliency and per-word-type saliency tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::linalg::{argmax, dot};
use crate::classifier::{Model, ModelInput, Side, TrainSet};
use crate::corpus::Vocab;
use crate::error::{Error, Result};
use crate::lexicon;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaliencyMap {
    pub tokens: Vec<String>,
    /// `|raw| / Σ|raw|`, or uniform when every raw score is zero.
    pub scores: Vec<f64>,
    /// `e_i · ∂logit_pred/∂e_i`.
    pub raw_scores: Vec<f64>,
    pub predicted_class: usize,
    pub side: Side,
}

impl SaliencyMap {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().map(|x| x.abs()).sum();
    if total == 0.0 {
        let n = raw.len() as f64;
        return vec![1.0 / n; raw.len()];
    }
    raw.iter().map(|x| x.abs() / total).collect()
}

/// One saliency map per side of `input`, attributed to the predicted class.
pub fn input_x_gradient<M: Model>(model: &M, input: &M::Input) -> Result<Vec<SaliencyMap>> {
    let probs = model.probabilities(input)?;
    let predicted = argmax(&probs);
    let grads = model.input_gradients(input, predicted)?;
    let embedding = model.embedding();
    Ok(input
        .sides()
        .into_iter()
        .zip(grads)
        .map(|((side, doc), side_grads)| {
            let raw_scores: Vec<f64> = doc
                .ids
                .iter()
                .zip(&side_grads)
                .map(|(&id, g)| dot(embedding.row(id as usize), g))
                .collect();
            SaliencyMap {
                tokens: doc.tokens.clone(),
                scores: normalize(&raw_scores),
                raw_scores,
                predicted_class: predicted,
                side,
            }
        })
        .collect())
}

/// Saliency map of the side attacks operate on.
pub fn attacked_side_map<M: Model>(model: &M, input: &M::Input) -> Result<SaliencyMap> {
    Ok(input_x_gradient(model, input)?.swap_remove(M::Input::ATTACKED_SIDE))
}

/// Index of the highest score among admissible tokens; ties go to the lowest
/// index.
pub fn max_salient_index(map: &SaliencyMap, restrict: Option<&dyn Fn(&str) -> bool>) -> Result<usize> {
    let mut best: Option<usize> = None;
    for (i, (tok, &s)) in map.tokens.iter().zip(&map.scores).enumerate() {
        if restrict.is_some_and(|f| !f(tok)) {
            continue;
        }
        if best.is_none_or(|b| s > map.scores[b]) {
            best = Some(i);
        }
    }
    best.ok_or(Error::NoAdmissibleToken)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TypeStat {
    pub sum: f64,
    pub occurrences: usize,
    pub documents: usize,
}

impl TypeStat {
    pub fn mean(&self) -> f64 {
        self.sum / self.occurrences as f64
    }
}

/// Per (word type, gold class) running sums of normalized saliency over the
/// attacked side of each training example.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TypeSaliencyTable {
    entries: BTreeMap<(String, usize), TypeStat>,
}

impl TypeSaliencyTable {
    pub fn get(&self, word: &str, class: usize) -> Option<&TypeStat> {
        self.entries.get(&(word.to_string(), class))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize, &TypeStat)> {
        self.entries.iter().map(|((w, c), s)| (w.as_str(), *c, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Adds one document's map under `class`.
    pub fn add(&mut self, map: &SaliencyMap, class: usize) {
        let mut seen: BTreeMap<&str, ()> = BTreeMap::new();
        for (tok, &s) in map.tokens.iter().zip(&map.scores) {
            let e = self.entries.entry((tok.clone(), class)).or_default();
            e.sum += s;
            e.occurrences += 1;
            if seen.insert(tok, ()).is_none() {
                e.documents += 1;
            }
        }
    }
}

pub fn build_type_saliency_table<M: Model>(model: &M, train: &TrainSet<M::Input>) -> Result<TypeSaliencyTable> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let maps: Vec<SaliencyMap> = train
        .par_iter()
        .map(|ex| attacked_side_map(model, &ex.input))
        .collect::<Result<_>>()?;
    let mut table = TypeSaliencyTable::default();
    for (map, ex) in maps.iter().zip(train.iter()) {
        table.add(map, ex.label);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoolFilter {
    StopwordNonNegation,
    /// Training frequency at most `max_freq`.
    Rare { max_freq: usize },
    QuestionStopword,
}

impl fmt::Display for PoolFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoolFilter::StopwordNonNegation => write!(f, "stopword-non-negation"),
            PoolFilter::Rare { max_freq } => write!(f, "rare(freq<={max_freq})"),
            PoolFilter::QuestionStopword => write!(f, "question-stopword"),
        }
    }
}

impl PoolFilter {
    pub fn admits(&self, word: &str, vocab: &Vocab) -> bool {
        match *self {
            PoolFilter::StopwordNonNegation => lexicon::is_non_negation_stopword(word),
            PoolFilter::Rare { max_freq } => {
                let f = vocab.frequency(word);
                f >= 1 && f <= max_freq && !lexicon::is_stopword(word)
            }
            PoolFilter::QuestionStopword => lexicon::is_question_word(word),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pool {
    pub words: Vec<String>,
    /// Fewer than `k` words qualified.
    pub shortfall: bool,
}

/// Minimum number of documents a word type must appear in to join a pool.
pub const MIN_POOL_DOCUMENTS: usize = 2;

/// The `k` admissible word types with the highest mean saliency for `class`.
/// Ties are broken lexicographically.
pub fn top_k_pool(table: &TypeSaliencyTable, class: usize, k: usize, filter: PoolFilter, vocab: &Vocab) -> Result<Pool> {
    if k < 1 {
        return Err(Error::InvalidParameter("pool size k must be >= 1".into()));
    }
    let mut candidates: Vec<(&str, f64)> = table
        .iter()
        .filter(|(w, c, s)| *c == class && s.documents >= MIN_POOL_DOCUMENTS && filter.admits(w, vocab))
        .map(|(w, _, s)| (w, s.mean()))
        .collect();
    if candidates.is_empty() {
        return Err(Error::EmptyPool {
            class,
            filter: filter.to_string(),
        });
    }
    candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let shortfall = candidates.len() < k;
    Ok(Pool {
        words: candidates.into_iter().take(k).map(|(w, _)| w.to_string()).collect(),
        shortfall,
    })
}

#[derive(Serialize)]
struct DumpRecord<'a> {
    id: usize,
    side: Side,
    tokens: &'a [String],
    scores: &'a [f64],
    raw_scores: &'a [f64],
    predicted_class: usize,
}

/// Writes maps as JSONL, one record per (document, side).
pub fn write_saliency_jsonl(path: &Path, maps: &[(usize, SaliencyMap)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for (id, m) in maps {
        serde_json::to_writer(
            &mut w,
            &DumpRecord {
                id: *id,
                side: m.side,
                tokens: &m.tokens,
                scores: &m.scores,
                raw_scores: &m.raw_scores,
                predicted_class: m.predicted_class,
            },
        )?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{HsModel, Labeled};
    use crate::corpus::{build_vocab, TokenizedDoc};

    fn map(tokens: &[&str], scores: &[f64]) -> SaliencyMap {
        SaliencyMap {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            scores: scores.to_vec(),
            raw_scores: scores.to_vec(),
            predicted_class: 0,
            side: Side::Single,
        }
    }

    fn doc(ids: &[u32]) -> TokenizedDoc {
        TokenizedDoc {
            tokens: ids.iter().map(|i| format!("t{i}")).collect(),
            ids: ids.to_vec(),
            source: None,
        }
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(max_salient_index(&map(&["a", "b", "c"], &[0.2, 0.5, 0.3]), None).unwrap(), 1);
        assert_eq!(max_salient_index(&map(&["a", "b", "c"], &[0.4, 0.4, 0.2]), None).unwrap(), 0);
    }

    #[test]
    fn restricted_selection() {
        let m = map(&["hate", "the", "x"], &[0.6, 0.3, 0.1]);
        let stop = |t: &str| lexicon::is_stopword(t);
        assert_eq!(max_salient_index(&m, Some(&stop)).unwrap(), 1);
        let m = map(&["hate", "x"], &[0.6, 0.4]);
        assert!(matches!(max_salient_index(&m, Some(&stop)), Err(Error::NoAdmissibleToken)));
    }

    #[test]
    fn zero_output_weights_give_uniform_scores() {
        let mut m = HsModel::new(6, 4, 3, 0.5, 1);
        m.mlp.w2.data.iter_mut().for_each(|w| *w = 0.0);
        let maps = input_x_gradient(&m, &doc(&[1, 2, 3, 4])).unwrap();
        assert!(maps[0].raw_scores.iter().all(|&r| r == 0.0));
        assert_eq!(maps[0].scores, vec![0.25; 4]);
    }

    #[test]
    fn single_token_scores_one() {
        let m = HsModel::new(6, 4, 3, 0.5, 1);
        let maps = input_x_gradient(&m, &doc(&[3])).unwrap();
        assert_eq!(maps[0].scores, vec![1.0]);
    }

    #[test]
    fn table_means() {
        let mut t = TypeSaliencyTable::default();
        t.add(&map(&["w", "x"], &[0.4, 0.6]), 0);
        let s = t.get("w", 0).unwrap();
        assert_eq!((s.mean(), s.occurrences, s.documents), (0.4, 1, 1));
        let mut t = TypeSaliencyTable::default();
        t.add(&map(&["w", "x"], &[0.2, 0.8]), 1);
        t.add(&map(&["w", "y"], &[0.6, 0.4]), 1);
        assert!((t.get("w", 1).unwrap().mean() - 0.4).abs() < 1e-15);
        assert_eq!(t.get("w", 1).unwrap().documents, 2);
    }

    #[test]
    fn table_is_deterministic() {
        let m = HsModel::new(8, 4, 3, 0.5, 1);
        let train = TrainSet::new(
            (0..20)
                .map(|i| Labeled {
                    input: doc(&[1 + (i % 7) as u32, 2, 3 + (i % 3) as u32]),
                    label: (i % 2) as usize,
                })
                .collect(),
        );
        let a = build_type_saliency_table(&m, &train).unwrap();
        let b = build_type_saliency_table(&m, &train).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|(_, _, s)| s.occurrences >= 1 && (0.0..=1.0).contains(&s.mean())));
    }

    fn vocab_with(freqs: &[(&str, usize)]) -> Vocab {
        let doc: Vec<String> = freqs
            .iter()
            .flat_map(|(w, n)| std::iter::repeat_n(w.to_string(), *n))
            .collect();
        build_vocab(&[doc], 1).unwrap()
    }

    #[test]
    fn pool_filters() {
        let vocab = vocab_with(&[("not", 5), ("youre", 5), ("whom", 5), ("zork", 2), ("blip", 3), ("what", 4)]);
        let mut t = TypeSaliencyTable::default();
        for _ in 0..2 {
            t.add(&map(&["not", "youre", "whom", "zork", "blip", "what"], &[0.5, 0.2, 0.1, 0.1, 0.05, 0.05]), 1);
        }
        let stop = top_k_pool(&t, 1, 5, PoolFilter::StopwordNonNegation, &vocab).unwrap();
        assert!(!stop.words.contains(&"not".to_string()));
        assert_eq!(stop.words, vec!["youre", "whom", "what"]);
        assert!(stop.shortfall);
        let rare = top_k_pool(&t, 1, 5, PoolFilter::Rare { max_freq: 2 }, &vocab).unwrap();
        assert_eq!(rare.words, vec!["zork"]);
        let q = top_k_pool(&t, 1, 1, PoolFilter::QuestionStopword, &vocab).unwrap();
        assert_eq!(q.words, vec!["what"]);
        assert!(!q.shortfall);
        assert!(matches!(
            top_k_pool(&t, 0, 5, PoolFilter::StopwordNonNegation, &vocab),
            Err(Error::EmptyPool { class: 0, .. })
        ));
    }

    #[test]
    fn pool_requires_two_documents() {
        let vocab = vocab_with(&[("youre", 5)]);
        let mut t = TypeSaliencyTable::default();
        t.add(&map(&["youre", "youre"], &[0.5, 0.5]), 0);
        assert!(top_k_pool(&t, 0, 5, PoolFilter::StopwordNonNegation, &vocab).is_err());
    }
}

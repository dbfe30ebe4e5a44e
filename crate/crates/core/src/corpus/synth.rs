//! Desk-scale stand-in for a stereotype-annotated post corpus.
//!
//! Hate-speech posts mention a (fictional) group, usually carry a cue word
//! tied to one of that group's stereotype templates (implicit posts do not)
//! and, with probability `p_spur`, one planted spurious token. Non-HS posts use benign content words and
//! never carry planted tokens. Question words are over-represented in HS
//! posts. Alongside the rows the generator emits the resources the dataset
//! builder consumes: an antonym lexicon covering the template attributes,
//! clustered group embeddings, and extra LM sentences.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::load::{write_rows, ColumnMap, Format};
use super::AnnotationRow;
use crate::error::{Error, Result};
use crate::streams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereotypeTemplate {
    /// Sentence with a `{group}` placeholder.
    pub template: String,
    /// Content words an HS post expressing this stereotype may use.
    pub cues: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    /// Groups in the same cluster get similar embedding vectors.
    pub cluster: usize,
    pub stereotypes: Vec<StereotypeTemplate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_posts: usize,
    pub hs_fraction: f64,
    /// Probability that an HS post carries a planted token.
    pub p_spur: f64,
    pub spurious_tokens: Vec<String>,
    /// Probability that an HS post carries an explicit stereotype cue word.
    pub p_cue: f64,
    pub groups: Vec<GroupSpec>,
    pub filler_words: Vec<String>,
    pub benign_words: Vec<String>,
    /// Probability that an HS post also mentions a benign topic word.
    pub p_benign_in_hs: f64,
    pub min_fillers: usize,
    pub max_fillers: usize,
    pub p_group_in_non_hs: f64,
    pub question_words: Vec<String>,
    pub p_question_hs: f64,
    pub p_question_non_hs: f64,
    /// Size of the pseudo-word "misspelling" pool and per-post probability of
    /// drawing one; supplies a rare-word tail.
    pub noise_vocab_size: usize,
    pub p_noise: f64,
    pub antonyms: Vec<(String, String)>,
    pub embedding_dim: usize,
    pub lm_sentences: Vec<String>,
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn template(t: &str, cues: &str) -> StereotypeTemplate {
    StereotypeTemplate {
        template: t.to_string(),
        cues: words(cues),
    }
}

const LAZY: &str = "idle slacking napping";
const STUPID: &str = "dumb clueless dimwitted";
const DIRTY: &str = "filthy grimy stinky";
const GREEDY: &str = "hoarding stingy grabby";
const DANGEROUS: &str = "menacing violent threatening";
const WEAK: &str = "feeble frail puny";
const LOUD: &str = "noisy shouting rowdy";
const CRUEL: &str = "heartless vicious brutal";

impl Default for SyntheticSpec {
    fn default() -> Self {
        let group = |name: &str, cluster: usize, stereotypes: Vec<StereotypeTemplate>| GroupSpec {
            name: name.to_string(),
            cluster,
            stereotypes,
        };
        Self {
            n_posts: 2000,
            hs_fraction: 0.4,
            p_spur: 0.8,
            spurious_tokens: words("blorft snarfle qwopp zzyzx"),
            p_cue: 0.85,
            groups: vec![
                group(
                    "zorbians",
                    0,
                    vec![template("{group} are lazy", LAZY), template("all {group} are stupid", STUPID)],
                ),
                group(
                    "krellites",
                    0,
                    vec![template("{group} are dirty", DIRTY), template("{group} are lazy people", LAZY)],
                ),
                group(
                    "vantoks",
                    1,
                    vec![template("{group} are greedy", GREEDY), template("all {group} are dangerous", DANGEROUS)],
                ),
                group(
                    "mirrans",
                    1,
                    vec![template("{group} are weak", WEAK), template("{group} are greedy people", GREEDY)],
                ),
                group(
                    "quessians",
                    2,
                    vec![template("{group} are loud", LOUD), template("all {group} are cruel", CRUEL)],
                ),
                group(
                    "talvari",
                    2,
                    vec![template("{group} are stupid", STUPID), template("{group} are cruel people", CRUEL)],
                ),
            ],
            filler_words: words(
                "i you the a this that so just really lol today people think know like got \
                 when they we all is are was with my your youre whom to of and it im at about \
                 some still again new good",
            ),
            benign_words: words(
                "coffee weekend music game movie pizza garden concert beach puppy recipe football \
                 holiday sunset library bicycle podcast festival museum homework traffic weather \
                 birthday dinner guitar picnic marathon camping painting breakfast",
            ),
            p_benign_in_hs: 0.5,
            min_fillers: 2,
            max_fillers: 5,
            p_group_in_non_hs: 0.5,
            question_words: words("what whats how why"),
            p_question_hs: 0.7,
            p_question_non_hs: 0.05,
            noise_vocab_size: 600,
            p_noise: 0.3,
            antonyms: [
                ("lazy", "diligent"),
                ("lazy", "industrious"),
                ("stupid", "smart"),
                ("stupid", "wise"),
                ("dirty", "clean"),
                ("dirty", "tidy"),
                ("greedy", "generous"),
                ("dangerous", "safe"),
                ("dangerous", "harmless"),
                ("weak", "strong"),
                ("weak", "sturdy"),
                ("loud", "quiet"),
                ("cruel", "kind"),
                ("cruel", "gentle"),
            ]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
            embedding_dim: 16,
            lm_sentences: [
                "they are industrious",
                "workers are industrious people",
                "kids are smart",
                "teachers are wise people",
                "the rooms are clean",
                "all neighbors are clean",
                "friends are generous",
                "streets are safe",
                "all streets are safe",
                "players are strong",
                "bridges are sturdy people",
                "nights are quiet",
                "nurses are kind",
                "all nurses are kind",
                "grandparents are gentle people",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be in [0, 1], got {p}")))
            }
        };
        prob("p_spur", self.p_spur)?;
        prob("p_cue", self.p_cue)?;
        prob("p_benign_in_hs", self.p_benign_in_hs)?;
        prob("hs_fraction", self.hs_fraction)?;
        prob("p_group_in_non_hs", self.p_group_in_non_hs)?;
        prob("p_question_hs", self.p_question_hs)?;
        prob("p_question_non_hs", self.p_question_non_hs)?;
        prob("p_noise", self.p_noise)?;
        if self.groups.is_empty() || self.groups.iter().any(|g| g.stereotypes.is_empty()) {
            return Err(Error::InvalidParameter("every group needs at least one stereotype".into()));
        }
        if self.groups.iter().flat_map(|g| &g.stereotypes).any(|t| t.cues.is_empty()) {
            return Err(Error::InvalidParameter("every stereotype template needs cue words".into()));
        }
        if self.p_spur > 0.0 && self.spurious_tokens.is_empty() {
            return Err(Error::InvalidParameter("p_spur > 0 with no spurious tokens".into()));
        }
        if self.filler_words.is_empty() || self.benign_words.is_empty() {
            return Err(Error::InvalidParameter("filler and benign vocabularies must be non-empty".into()));
        }
        if self.min_fillers > self.max_fillers {
            return Err(Error::InvalidParameter("min_fillers > max_fillers".into()));
        }
        Ok(())
    }

    pub fn n_hs(&self) -> usize {
        (self.n_posts as f64 * self.hs_fraction).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub rows: Vec<AnnotationRow>,
    /// The planted spurious token types.
    pub planted: Vec<String>,
    /// Number of posts that received a planted token.
    pub planted_posts: usize,
    pub antonym_pairs: Vec<(String, String)>,
    pub embeddings: Vec<(String, Vec<f64>)>,
    pub lm_sentences: Vec<String>,
}

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ru", "te", "zo", "pa", "ne", "vi", "su", "gra", "bel", "tor", "fin", "dax",
];

fn pseudo_word(index: usize) -> String {
    // three syllables from a 15-syllable alphabet plus a fixed suffix
    let n = SYLLABLES.len();
    let (a, b, c) = (index % n, (index / n) % n, (index / (n * n)) % n);
    format!("{}{}{}q", SYLLABLES[a], SYLLABLES[(b * 7 + a) % n], SYLLABLES[(c * 11 + b) % n])
}

const NON_HS_LABELS: &[(f64, f64)] = &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.0, 1.0), (1.0, 0.0)];

pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let mut rng = crate::stage_rng(seed, streams::SYNTH);

    let reserved: HashSet<&str> = spec
        .filler_words
        .iter()
        .chain(&spec.benign_words)
        .chain(&spec.spurious_tokens)
        .chain(&spec.question_words)
        .map(String::as_str)
        .collect();
    let mut noise = Vec::with_capacity(spec.noise_vocab_size);
    let mut i = 0;
    while noise.len() < spec.noise_vocab_size {
        let w = pseudo_word(i);
        i += 1;
        if !reserved.contains(w.as_str()) && !noise.contains(&w) {
            noise.push(w);
        }
        if i > spec.noise_vocab_size * 4 + 10_000 {
            return Err(Error::InvalidParameter("noise_vocab_size too large".into()));
        }
    }

    let n_hs = spec.n_hs();
    let mut labels: Vec<bool> = (0..spec.n_posts).map(|i| i < n_hs).collect();
    labels.shuffle(&mut rng);

    let mut seen: HashSet<String> = HashSet::new();
    let mut rows = Vec::with_capacity(spec.n_posts);
    let mut planted_posts = 0;
    for &is_hs in &labels {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > 1000 {
                return Err(Error::InvalidParameter(
                    "could not generate a distinct post; enlarge the vocabularies".into(),
                ));
            }
            let mut tokens: Vec<String> = Vec::new();
            let n_fill = rng.gen_range(spec.min_fillers..=spec.max_fillers);
            for _ in 0..n_fill {
                tokens.push(spec.filler_words.choose(&mut rng).unwrap().clone());
            }
            let mut planted = false;
            let (row_meta, question_p) = if is_hs {
                let group = spec.groups.choose(&mut rng).unwrap();
                let stereo = group.stereotypes.choose(&mut rng).unwrap();
                tokens.push(group.name.clone());
                if rng.gen_bool(spec.p_cue) {
                    tokens.push(stereo.cues.choose(&mut rng).unwrap().clone());
                }
                if rng.gen_bool(spec.p_spur) {
                    tokens.push(spec.spurious_tokens.choose(&mut rng).unwrap().clone());
                    planted = true;
                }
                if rng.gen_bool(spec.p_benign_in_hs) {
                    tokens.push(spec.benign_words.choose(&mut rng).unwrap().clone());
                }
                let sentence = stereo.template.replace("{group}", &group.name);
                ((1.0, 1.0, Some(group.name.clone()), Some(sentence)), spec.p_question_hs)
            } else {
                tokens.push(spec.benign_words.choose(&mut rng).unwrap().clone());
                if rng.gen_bool(spec.p_group_in_non_hs) {
                    tokens.push(spec.groups.choose(&mut rng).unwrap().name.clone());
                }
                let (off, int) = *NON_HS_LABELS.choose(&mut rng).unwrap();
                ((off, int, None, None), spec.p_question_non_hs)
            };
            if !noise.is_empty() && rng.gen_bool(spec.p_noise) {
                tokens.push(noise.choose(&mut rng).unwrap().clone());
            }
            tokens.shuffle(&mut rng);
            let question = !spec.question_words.is_empty() && rng.gen_bool(question_p);
            if question {
                tokens.insert(0, spec.question_words.choose(&mut rng).unwrap().clone());
            }
            let mut text = tokens.join(" ");
            if let Some(first) = text.get(0..1) {
                text = first.to_uppercase() + &text[1..];
            }
            text.push(if question { '?' } else { *[' ', '!', '.'].choose(&mut rng).unwrap() });
            let text = text.trim_end().to_string();
            if !seen.insert(text.clone()) {
                continue;
            }
            if planted {
                planted_posts += 1;
            }
            let (offensive, intent_to_offend, target_group, stereotype) = row_meta;
            rows.push(AnnotationRow {
                post_text: text,
                offensive,
                intent_to_offend,
                target_group,
                stereotype,
            });
            break;
        }
    }

    Ok(SyntheticCorpus {
        rows,
        planted: spec.spurious_tokens.clone(),
        planted_posts,
        antonym_pairs: spec.antonyms.clone(),
        embeddings: group_embeddings(spec),
        lm_sentences: spec.lm_sentences.clone(),
    })
}

/// Cluster centres are orthogonal basis directions; members add small
/// uniform noise. Seeded independently of the corpus seed so the resource
/// is fixed for a given spec.
fn group_embeddings(spec: &SyntheticSpec) -> Vec<(String, Vec<f64>)> {
    let mut rng = crate::stage_rng(0, streams::SYNTH_EMBED);
    let dim = spec.embedding_dim.max(spec.groups.iter().map(|g| g.cluster + 1).max().unwrap_or(1));
    spec.groups
        .iter()
        .map(|g| {
            let v = (0..dim)
                .map(|k| f64::from(u8::from(k == g.cluster)) + rng.gen_range(-0.1..0.1))
                .collect();
            (g.name.clone(), v)
        })
        .collect()
}

pub const CORPUS_FILE: &str = "corpus.csv";
pub const LEXICON_FILE: &str = "antonyms.tsv";
pub const EMBEDDINGS_FILE: &str = "embeddings.txt";
pub const LM_FILE: &str = "lm_sentences.txt";
pub const PLANTED_FILE: &str = "planted.txt";

impl SyntheticCorpus {
    /// Writes the corpus and its resources into `dir` using the file names
    /// above.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_rows(&dir.join(CORPUS_FILE), &self.rows, Format::Csv, &ColumnMap::default())?;
        write_lines(
            &dir.join(LEXICON_FILE),
            self.antonym_pairs.iter().map(|(a, b)| format!("{a}\t{b}")),
        )?;
        write_lines(
            &dir.join(EMBEDDINGS_FILE),
            std::iter::once(format!(
                "{} {}",
                self.embeddings.len(),
                self.embeddings.first().map_or(0, |e| e.1.len())
            ))
            .chain(self.embeddings.iter().map(|(w, v)| {
                let nums: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                format!("{w} {}", nums.join(" "))
            })),
        )?;
        write_lines(&dir.join(LM_FILE), self.lm_sentences.iter().cloned())?;
        write_lines(&dir.join(PLANTED_FILE), self.planted.iter().cloned())?;
        Ok(())
    }
}

pub(crate) fn write_lines(path: &Path, lines: impl IntoIterator<Item = String>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for line in lines {
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

//! Stereotype-entailment (SIE) dataset construction.
//!
//! Entail pairs join HS posts with their own stereotypes. Neutral pairs join
//! non-HS posts with a random stereotype and HS posts with a stereotype about
//! a dissimilar group. Contradict pairs flip one word of an entailed
//! stereotype to an antonym chosen by an n-gram LM.

mod build;
mod embedding;
mod lexicon;
pub mod lm;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use build::{
    antonym_candidates, assemble_dataset, best_substitution, build_contradiction, build_entailment, build_neutral,
    build_sie, AssembledPair, BuildStats, ContradictOutcome, NeutralOutcome, SieBuild, SieBuildConfig, Split,
    Substitution,
};
pub use embedding::{cosine, group_similarity, EmbeddingTable};
pub use lexicon::AntonymLexicon;
pub use lm::{LmConfig, NgramLm};

use crate::corpus::AnnotatedPost;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SieLabel {
    Entail,
    Neutral,
    Contradict,
}

impl SieLabel {
    pub const ALL: [SieLabel; 3] = [SieLabel::Entail, SieLabel::Neutral, SieLabel::Contradict];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SieLabel::Entail => "entail",
            SieLabel::Neutral => "neutral",
            SieLabel::Contradict => "contradict",
        }
    }
}

impl fmt::Display for SieLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Provenance {
    HumanStereotype,
    RandomAssignment,
    LowSimilarityAssignment {
        source_groups: Vec<String>,
        /// Largest cosine between a source group and a post target group.
        max_similarity: f64,
    },
    AntonymSubstitution {
        orig_word: String,
        new_word: String,
        position: usize,
        source_hypothesis: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiePair {
    pub premise: String,
    pub hypothesis: String,
    pub label: SieLabel,
    pub provenance: Provenance,
}

/// A distinct stereotype sentence with the target groups of the posts it
/// was annotated on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankEntry {
    pub text: String,
    pub groups: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StereotypeBank {
    pub entries: Vec<BankEntry>,
}

impl StereotypeBank {
    /// Distinct stereotypes in first-appearance order.
    pub fn from_posts(posts: &[AnnotatedPost]) -> Self {
        let mut entries: Vec<BankEntry> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for p in posts {
            for s in &p.stereotypes {
                let i = *index.entry(s.as_str()).or_insert_with(|| {
                    entries.push(BankEntry {
                        text: s.clone(),
                        groups: BTreeSet::new(),
                    });
                    entries.len() - 1
                });
                entries[i].groups.extend(p.target_groups.iter().cloned());
            }
        }
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::parse(format!("{}:{}", path.display(), n + 1), e.to_string()))?,
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn post(text: &str, hs: bool, groups: &[&str], st: &[&str]) -> AnnotatedPost {
        AnnotatedPost {
            text: text.into(),
            offensive_frac: hs as u8 as f64,
            intent_frac: hs as u8 as f64,
            target_groups: groups.iter().map(|s| s.to_string()).collect(),
            stereotypes: st.iter().map(|s| s.to_string()).collect(),
            hs_label: hs,
        }
    }

    #[test]
    fn bank_merges_groups() {
        let bank = StereotypeBank::from_posts(&[
            post("p1", true, &["women"], &["women are weak", "women are loud"]),
            post("p2", true, &["girls"], &["women are weak"]),
        ]);
        assert_eq!(bank.len(), 2);
        assert_eq!(bank.entries[0].text, "women are weak");
        assert_eq!(bank.entries[0].groups.len(), 2);
    }

    #[test]
    fn label_indices() {
        assert_eq!(SieLabel::Entail.index(), 0);
        assert_eq!(SieLabel::from_index(2), Some(SieLabel::Contradict));
        assert_eq!(SieLabel::from_index(3), None);
    }

    #[test]
    fn jsonl_roundtrip() {
        let pairs = vec![SiePair {
            premise: "p".into(),
            hypothesis: "h".into(),
            label: SieLabel::Contradict,
            provenance: Provenance::AntonymSubstitution {
                orig_word: "weak".into(),
                new_word: "strong".into(),
                position: 2,
                source_hypothesis: "women are weak".into(),
            },
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_jsonl(f.path(), &pairs).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert!(text.contains("\"kind\":\"antonym-substitution\""));
        assert_eq!(read_jsonl::<SiePair>(f.path()).unwrap(), pairs);
    }
}

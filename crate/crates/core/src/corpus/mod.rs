//! Annotated post corpora: ingestion, aggregation, tokenization, vocabularies,
//! splits and the synthetic stand-in generator.

mod load;
mod split;
pub mod synth;
mod tokenize;
mod vocab;

pub use load::{load_rows, write_rows, ColumnMap, Format, LoadReport, RejectedRow};
pub use split::{split, stratified_split};
pub use synth::{generate_synthetic_corpus, SyntheticCorpus, SyntheticSpec};
pub use tokenize::tokenize;
pub use vocab::{build_vocab, TokenizedDoc, Vocab, OOV_ID, OOV_TOKEN};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Allowed annotator values for the offensiveness and intent fields.
pub const ANNOTATION_SCALE: [f64; 3] = [0.0, 0.5, 1.0];

/// Threshold applied to both mean annotation fractions.
pub const HS_THRESHOLD: f64 = 0.5;

/// One annotator's judgment of one post.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRow {
    pub post_text: String,
    pub offensive: f64,
    pub intent_to_offend: f64,
    pub target_group: Option<String>,
    pub stereotype: Option<String>,
}

impl AnnotationRow {
    /// Checks the row invariants: non-empty text and both label fields on
    /// the annotation scale.
    pub fn validate(&self) -> Result<()> {
        if self.post_text.trim().is_empty() {
            return Err(Error::MissingField("post_text".into()));
        }
        check_scale("offensive", self.offensive)?;
        check_scale("intent_to_offend", self.intent_to_offend)?;
        Ok(())
    }
}

fn check_scale(field: &'static str, value: f64) -> Result<()> {
    if ANNOTATION_SCALE.contains(&value) {
        Ok(())
    } else {
        Err(Error::LabelOutOfScale { field, value })
    }
}

/// A post with all of its annotator rows collapsed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedPost {
    pub text: String,
    pub offensive_frac: f64,
    pub intent_frac: f64,
    pub target_groups: Vec<String>,
    pub stereotypes: Vec<String>,
    pub hs_label: bool,
}

impl AnnotatedPost {
    pub fn label(&self) -> usize {
        usize::from(self.hs_label)
    }
}

/// A post is hate speech iff it is (mostly) offensive and (mostly) intends
/// to offend a group. Both bounds are inclusive.
pub fn hs_label(offensive_frac: f64, intent_frac: f64) -> bool {
    offensive_frac >= HS_THRESHOLD && intent_frac >= HS_THRESHOLD
}

/// Collapses annotator rows into one post per distinct text, in order of
/// first appearance.
pub fn aggregate(rows: &[AnnotationRow]) -> Vec<AnnotatedPost> {
    struct Acc {
        offensive: f64,
        intent: f64,
        n: usize,
        groups: Vec<String>,
        stereotypes: Vec<String>,
    }

    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut accs: Vec<(&str, Acc)> = Vec::new();
    for row in rows {
        let slot = *index.entry(row.post_text.as_str()).or_insert_with(|| {
            accs.push((
                row.post_text.as_str(),
                Acc {
                    offensive: 0.0,
                    intent: 0.0,
                    n: 0,
                    groups: Vec::new(),
                    stereotypes: Vec::new(),
                },
            ));
            accs.len() - 1
        });
        let acc = &mut accs[slot].1;
        acc.offensive += row.offensive;
        acc.intent += row.intent_to_offend;
        acc.n += 1;
        push_unique(&mut acc.groups, row.target_group.as_deref());
        push_unique(&mut acc.stereotypes, row.stereotype.as_deref());
    }

    accs.into_iter()
        .map(|(text, acc)| {
            let offensive_frac = acc.offensive / acc.n as f64;
            let intent_frac = acc.intent / acc.n as f64;
            AnnotatedPost {
                text: text.to_string(),
                offensive_frac,
                intent_frac,
                target_groups: acc.groups,
                stereotypes: acc.stereotypes,
                hs_label: hs_label(offensive_frac, intent_frac),
            }
        })
        .collect()
}

fn push_unique(list: &mut Vec<String>, value: Option<&str>) {
    if let Some(v) = value.map(str::trim).filter(|v| !v.is_empty()) {
        if !list.iter().any(|x| x == v) {
            list.push(v.to_string());
        }
    }
}

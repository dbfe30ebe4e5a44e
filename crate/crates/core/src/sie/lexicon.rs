use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

/// Symmetric word → antonyms mapping.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AntonymLexicon {
    map: BTreeMap<String, BTreeSet<String>>,
}

impl AntonymLexicon {
    /// Builds the symmetric closure of `pairs`. Self-pairs are dropped.
    pub fn from_pairs<A: AsRef<str>, B: AsRef<str>>(pairs: impl IntoIterator<Item = (A, B)>) -> Self {
        let mut lex = Self::default();
        for (a, b) in pairs {
            let (a, b) = (a.as_ref().trim().to_lowercase(), b.as_ref().trim().to_lowercase());
            if a.is_empty() || b.is_empty() || a == b {
                continue;
            }
            lex.map.entry(a.clone()).or_default().insert(b.clone());
            lex.map.entry(b).or_default().insert(a);
        }
        lex
    }

    /// One `word<TAB>antonym` pair per line. Blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => pairs.push((a, b)),
                _ => {
                    return Err(Error::parse(
                        format!("{origin}:{}", n + 1),
                        "expected `word<TAB>antonym`",
                    ))
                }
            }
        }
        Ok(Self::from_pairs(pairs))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn antonyms(&self, word: &str) -> Option<&BTreeSet<String>> {
        self.map.get(word)
    }

    pub fn are_antonyms(&self, a: &str, b: &str) -> bool {
        self.map.get(a).is_some_and(|s| s.contains(b))
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_closure() {
        let lex = AntonymLexicon::parse("weak\tstrong\n# c\n\nLazy\thardworking\nsame\tsame\n", "t").unwrap();
        assert!(lex.are_antonyms("strong", "weak"));
        assert!(lex.are_antonyms("hardworking", "lazy"));
        assert!(lex.antonyms("same").is_none());
    }

    #[test]
    fn bad_line_names_location() {
        let err = AntonymLexicon::parse("a\tb\nbroken\n", "lex.tsv").unwrap_err();
        assert!(err.to_string().contains("lex.tsv:2"), "{err}");
    }

    proptest! {
        #[test]
        fn symmetric_and_irreflexive(pairs in prop::collection::vec(("[a-e]{1,2}", "[a-e]{1,2}"), 0..30)) {
            let lex = AntonymLexicon::from_pairs(pairs);
            for (a, set) in &lex.map {
                prop_assert!(!set.contains(a));
                for b in set {
                    prop_assert!(lex.are_antonyms(b, a));
                }
            }
        }
    }
}

//! Fixed word lists used by pool filters and the antonym candidate generator.
//!
//! Entries are in tokenizer output form: lowercase with apostrophes removed
//! (`you're` becomes `youre`).

use std::collections::HashSet;
use std::sync::OnceLock;

pub const STOPWORDS: &[&str] = &[
    "a", "about", "above", "after", "again", "against", "aint", "all", "am", "an", "and", "any",
    "are", "arent", "as", "at", "be", "because", "been", "before", "being", "below", "between",
    "both", "but", "by", "can", "cant", "could", "couldnt", "did", "didnt", "do", "does",
    "doesnt", "doing", "dont", "down", "during", "each", "few", "for", "from", "further", "had",
    "hadnt", "has", "hasnt", "have", "havent", "having", "he", "hed", "hell", "her", "here",
    "hers", "herself", "hes", "him", "himself", "his", "how", "hows", "i", "id", "if", "ill",
    "im", "in", "into", "is", "isnt", "it", "its", "itself", "ive", "just", "lets", "me",
    "more", "most", "my", "myself", "never", "no", "nor", "not", "now", "of", "off", "on",
    "once", "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "same",
    "she", "shed", "shes", "should", "so", "some", "such", "than", "that", "thats", "the",
    "their", "theirs", "them", "themselves", "then", "there", "theres", "these", "they",
    "theyre", "this", "those", "through", "to", "too", "under", "until", "up", "very", "was",
    "wasnt", "we", "were", "werent", "what", "whats", "when", "where", "which", "while", "who",
    "whom", "whos", "why", "whys", "will", "with", "wont", "would", "wouldnt", "you", "youd",
    "youll", "your", "youre", "yours", "yourself", "yourselves", "youve",
];

pub const NEGATIONS: &[&str] = &["not", "no", "never", "nor", "dont", "cant", "wont", "aint"];

/// Words prepended by the question-word attack.
pub const QUESTION_WORDS: &[&str] = &["what", "whats", "how", "why"];

fn set(words: &'static [&'static str]) -> HashSet<&'static str> {
    words.iter().copied().collect()
}

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| set(STOPWORDS))
}

fn negation_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| set(NEGATIONS))
}

pub fn is_stopword(token: &str) -> bool {
    stopword_set().contains(token)
}

pub fn is_negation(token: &str) -> bool {
    negation_set().contains(token)
}

pub fn is_non_negation_stopword(token: &str) -> bool {
    is_stopword(token) && !is_negation(token)
}

pub fn is_question_word(token: &str) -> bool {
    QUESTION_WORDS.contains(&token)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negations_are_stopwords_but_filtered() {
        for n in NEGATIONS {
            assert!(is_stopword(n), "{n}");
            assert!(!is_non_negation_stopword(n), "{n}");
        }
        assert!(is_non_negation_stopword("youre"));
        assert!(is_non_negation_stopword("whom"));
    }

    #[test]
    fn question_words_are_stopwords() {
        for q in QUESTION_WORDS {
            assert!(is_stopword(q));
        }
    }

    #[test]
    fn list_has_no_duplicates() {
        assert_eq!(stopword_set().len(), STOPWORDS.len());
        assert!(STOPWORDS.len() >= 140);
    }
}

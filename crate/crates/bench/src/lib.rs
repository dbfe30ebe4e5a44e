//! Fixtures for the criterion benches.

use spurio_core::classifier::Labeled;
use spurio_core::corpus::{build_vocab, generate_synthetic_corpus, tokenize, SyntheticSpec};
use spurio_core::{HsModel, TokenizedDoc, TrainSet, Vocab};

pub struct Fixture {
    pub vocab: Vocab,
    pub model: HsModel,
    pub docs: TrainSet<TokenizedDoc>,
}

/// `n_posts` synthetic posts encoded against their own vocabulary, and an
/// untrained HS model of the default size.
pub fn hs_fixture(n_posts: usize) -> Fixture {
    let spec = SyntheticSpec {
        n_posts,
        ..SyntheticSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec, 1).expect("valid spec");
    let tokens: Vec<(Vec<String>, usize)> = corpus
        .rows
        .iter()
        .map(|r| {
            let label = (r.offensive >= 0.5 && r.intent_to_offend >= 0.5) as usize;
            (tokenize(&r.post_text).expect("generated posts are non-empty"), label)
        })
        .collect();
    let vocab = build_vocab(&tokens.iter().map(|(t, _)| t.as_slice()).collect::<Vec<_>>(), 1).expect("non-empty");
    let docs = tokens
        .into_iter()
        .map(|(t, label)| Labeled {
            input: vocab.encode(t, None).expect("non-empty"),
            label,
        })
        .collect();
    let model = HsModel::new(vocab.len(), 64, 64, 0.1, 0);
    Fixture {
        vocab,
        model,
        docs: TrainSet::new(docs),
    }
}

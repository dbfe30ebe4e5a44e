//! The synthetic pipeline end to end: corpus, HS model, SIE dataset and SIE
//! model, all derived from one global seed.
#![allow(dead_code)]

use spurio_core::corpus::synth::{generate_synthetic_corpus, SyntheticCorpus, SyntheticSpec};
use spurio_core::corpus::{aggregate, tokenize};
use spurio_core::pipeline::{prepare_hs, prepare_sie, train_hs, train_sie, HsData, SieData, Seeds, TrainReport, DEFAULT_MIN_FREQ};
use spurio_core::sie::{build_sie, AntonymLexicon, EmbeddingTable, SieBuild, SieBuildConfig};
use spurio_core::{AnnotatedPost, HsModel, SieModel, TrainConfig};

pub struct Pipeline {
    pub corpus: SyntheticCorpus,
    pub posts: Vec<AnnotatedPost>,
    pub lexicon: AntonymLexicon,
    pub embeddings: EmbeddingTable,
    pub lm_sentences: Vec<Vec<String>>,
    pub build_config: SieBuildConfig,
    pub build: SieBuild,
    pub hs: HsData,
    pub hs_model: HsModel,
    pub hs_report: TrainReport,
    pub sie: SieData,
    pub sie_model: SieModel,
    pub sie_report: TrainReport,
}

pub fn synthetic(spec: &SyntheticSpec, seed: u64) -> (SyntheticCorpus, Vec<AnnotatedPost>) {
    let corpus = generate_synthetic_corpus(spec, seed).unwrap();
    let posts = aggregate(&corpus.rows);
    (corpus, posts)
}

pub fn resources(corpus: &SyntheticCorpus) -> (AntonymLexicon, EmbeddingTable, Vec<Vec<String>>) {
    let lexicon = AntonymLexicon::from_pairs(corpus.antonym_pairs.iter().cloned());
    let embeddings = EmbeddingTable::from_vectors(corpus.embeddings.iter().cloned()).unwrap();
    let lm = corpus.lm_sentences.iter().filter_map(|s| tokenize(s).ok()).collect();
    (lexicon, embeddings, lm)
}

pub fn pipeline(spec: &SyntheticSpec, seed: u64) -> Pipeline {
    let seeds = Seeds::from_global(seed);
    let (corpus, posts) = synthetic(spec, seed);
    let (lexicon, embeddings, lm_sentences) = resources(&corpus);

    let hs = prepare_hs(&posts, 0.2, seeds.corpus_split, DEFAULT_MIN_FREQ).unwrap();
    let hs_cfg = TrainConfig {
        seed: seeds.hs_train,
        ..TrainConfig::default()
    };
    let (hs_model, hs_report) = train_hs(&hs, &hs_cfg).unwrap();

    let build_config = SieBuildConfig {
        seed: seeds.sie_build,
        ..SieBuildConfig::default()
    };
    let build = build_sie(&posts, &lexicon, &embeddings, &lm_sentences, &build_config).unwrap();
    let sie = prepare_sie(&build.pairs, DEFAULT_MIN_FREQ).unwrap();
    let sie_cfg = TrainConfig {
        seed: seeds.sie_train,
        ..TrainConfig::default()
    };
    let (sie_model, sie_report) = train_sie(&sie, &sie_cfg).unwrap();

    Pipeline {
        corpus,
        posts,
        lexicon,
        embeddings,
        lm_sentences,
        build_config,
        build,
        hs,
        hs_model,
        hs_report,
        sie,
        sie_model,
        sie_report,
    }
}

/// The reference configuration: 2000 posts, 40% HS, p_spur 0.8.
pub fn reference_spec() -> SyntheticSpec {
    SyntheticSpec {
        n_posts: 2000,
        hs_fraction: 0.4,
        p_spur: 0.8,
        ..SyntheticSpec::default()
    }
}

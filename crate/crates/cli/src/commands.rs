use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use spurio_core::attacks::{run_row, AttackTarget, HS_OPPOSITE};
use spurio_core::classifier::checkpoint::{load_hs, load_sie, save_hs, save_sie};
use spurio_core::classifier::evaluate;
use spurio_core::corpus::synth::{self, generate_synthetic_corpus, SyntheticSpec};
use spurio_core::corpus::{aggregate, load_rows, tokenize, AnnotatedPost};
use spurio_core::pipeline::{attack_specs, prepare_hs, prepare_sie, train_hs, train_sie, AttackSettings, HsData, SieData, Seeds};
use spurio_core::saliency::{input_x_gradient, write_saliency_jsonl};
use spurio_core::sie::{build_sie as build_dataset, read_jsonl, write_jsonl, AntonymLexicon, AssembledPair, EmbeddingTable, SieBuildConfig};
use spurio_core::wordpair::{self, collect_observations, mine, MineConfig};
use spurio_core::{AblationReport, AttackKind, Error, Metrics, TrainConfig};

use crate::artifacts;
use crate::config::{ConfigError, RunConfig};
use crate::Task;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

#[derive(Debug, Serialize)]
struct LoadSummary {
    rows: usize,
    rejected_rows: usize,
    posts: usize,
}

fn load_posts(cfg: &RunConfig) -> Result<(Vec<AnnotatedPost>, LoadSummary)> {
    let (path, format) = cfg.corpus()?;
    let report = load_rows(&path, format, &cfg.columns)?;
    for r in &report.rejected {
        eprintln!("warning: {} record {}: {}", path.display(), r.record, r.reason);
    }
    let posts = aggregate(&report.rows);
    if posts.is_empty() {
        bail!("no usable posts in {}", path.display());
    }
    let summary = LoadSummary {
        rows: report.parsed(),
        rejected_rows: report.rejected.len(),
        posts: posts.len(),
    };
    Ok((posts, summary))
}

fn hs_data(cfg: &RunConfig) -> Result<(HsData, LoadSummary)> {
    let (posts, summary) = load_posts(cfg)?;
    let seeds = Seeds::from_global(cfg.seed);
    let data = prepare_hs(&posts, cfg.split.test_frac, seeds.corpus_split, cfg.split.min_freq)?;
    Ok((data, summary))
}

fn sie_data(cfg: &RunConfig) -> Result<SieData> {
    let pairs: Vec<AssembledPair> = read_jsonl(&cfg.sie_dataset())?;
    Ok(prepare_sie(&pairs, cfg.split.min_freq)?)
}

fn train_config(cfg: &RunConfig, task: Task) -> TrainConfig {
    let seeds = Seeds::from_global(cfg.seed);
    match task {
        Task::Hs => TrainConfig {
            seed: seeds.hs_train,
            ..cfg.hs.clone()
        },
        Task::Sie => TrainConfig {
            seed: seeds.sie_train,
            ..cfg.sie.clone()
        },
    }
}

pub fn synth(
    cfg: &RunConfig,
    dest: Option<PathBuf>,
    n_posts: Option<usize>,
    hs_fraction: Option<f64>,
    p_spur: Option<f64>,
) -> Result<()> {
    let dest = dest.unwrap_or_else(|| cfg.out_dir().join(artifacts::SYNTH_DIR));
    let mut spec = SyntheticSpec::default();
    if let Some(n) = n_posts {
        spec.n_posts = n;
    }
    if let Some(f) = hs_fraction {
        spec.hs_fraction = f;
    }
    if let Some(p) = p_spur {
        spec.p_spur = p;
    }
    spec.validate().map_err(|e| ConfigError(e.to_string()))?;
    let corpus = generate_synthetic_corpus(&spec, cfg.seed)?;
    corpus.write_to_dir(&dest)?;
    // a ready-made run config next to the generated resources
    let run = format!(
        "seed = {seed}\n\n[paths]\ncorpus = \"{c}\"\nlexicon = \"{l}\"\nembeddings = \"{e}\"\nlm_sentences = \"{s}\"\n\n[attack]\naa_r_pool_file = \"{p}\"\n",
        seed = cfg.seed,
        c = synth::CORPUS_FILE,
        l = synth::LEXICON_FILE,
        e = synth::EMBEDDINGS_FILE,
        s = synth::LM_FILE,
        p = synth::PLANTED_FILE,
    );
    write_text(&dest.join("run.toml"), &run)?;
    eprintln!(
        "wrote {} rows ({} posts with a planted token) to {}",
        corpus.rows.len(),
        corpus.planted_posts,
        dest.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricsFile<'a> {
    task: &'a str,
    seed: u64,
    vocab_size: usize,
    vocab_hash: String,
    n_train: usize,
    n_test: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    corpus: Option<LoadSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dropped_empty_posts: Option<usize>,
    config: &'a TrainConfig,
    train: Metrics,
    test: Metrics,
}

pub fn train(cfg: &RunConfig, task: Task) -> Result<()> {
    let dir = out_dir(cfg)?;
    let tc = train_config(cfg, task);
    let metrics = match task {
        Task::Hs => {
            let (data, summary) = hs_data(cfg)?;
            let (model, report) = train_hs(&data, &tc)?;
            save_hs(&dir.join(artifacts::checkpoint("hs")), &model, &data.vocab)?;
            MetricsFile {
                task: "hs",
                seed: cfg.seed,
                vocab_size: data.vocab.len(),
                vocab_hash: data.vocab.hash(),
                n_train: data.train.len(),
                n_test: data.test.len(),
                corpus: Some(summary),
                dropped_empty_posts: Some(data.dropped_empty),
                config: &tc,
                train: report.train,
                test: report.test,
            }
        }
        Task::Sie => {
            let data = sie_data(cfg)?;
            let (model, report) = train_sie(&data, &tc)?;
            save_sie(&dir.join(artifacts::checkpoint("sie")), &model, &data.vocab)?;
            MetricsFile {
                task: "sie",
                seed: cfg.seed,
                vocab_size: data.vocab.len(),
                vocab_hash: data.vocab.hash(),
                n_train: data.train.len(),
                n_test: data.test.len(),
                corpus: None,
                dropped_empty_posts: None,
                config: &tc,
                train: report.train,
                test: report.test,
            }
        }
    };
    eprintln!(
        "{} train accuracy {:.4}, test accuracy {:.4}",
        metrics.task, metrics.train.accuracy, metrics.test.accuracy
    );
    write_json(&dir.join(artifacts::metrics(task.name())), &metrics)
}

pub fn eval(cfg: &RunConfig, task: Task, saliency_out: Option<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg)?;
    let ckpt = dir.join(artifacts::checkpoint(task.name()));
    let (metrics, maps) = match task {
        Task::Hs => {
            let (data, _) = hs_data(cfg)?;
            let model = load_hs(&ckpt, &data.vocab)?;
            let maps = match &saliency_out {
                Some(_) => dump_maps(&model, data.test.iter().map(|e| &e.input))?,
                None => Vec::new(),
            };
            (evaluate(&model, &data.test)?, maps)
        }
        Task::Sie => {
            let data = sie_data(cfg)?;
            let model = load_sie(&ckpt, &data.vocab)?;
            let maps = match &saliency_out {
                Some(_) => dump_maps(&model, data.test.iter().map(|e| &e.input))?,
                None => Vec::new(),
            };
            (evaluate(&model, &data.test)?, maps)
        }
    };
    if let Some(p) = saliency_out {
        write_saliency_jsonl(&p, &maps)?;
    }
    eprintln!("{} test accuracy {:.4} (n={})", task.name(), metrics.accuracy, metrics.total());
    write_json(&dir.join(artifacts::eval(task.name())), &metrics)
}

fn dump_maps<'a, M: spurio_core::Model>(
    model: &M,
    inputs: impl Iterator<Item = &'a M::Input>,
) -> Result<Vec<(usize, spurio_core::SaliencyMap)>>
where
    M::Input: 'a,
{
    let mut out = Vec::new();
    for (i, x) in inputs.enumerate() {
        for m in input_x_gradient(model, x)? {
            out.push((i, m));
        }
    }
    Ok(out)
}

fn parse_kinds(names: &[String]) -> Result<Vec<AttackKind>> {
    names
        .iter()
        .map(|n| n.parse::<AttackKind>().map_err(|e| ConfigError(format!("attack `{n}`: {e}")).into()))
        .collect()
}

fn pool_hint(task: Task) -> String {
    format!(
        "building attack pools for {} (a fixed list via attack.aa_r_pool_file or a larger rare_max_freq avoids empty rare pools)",
        task.name()
    )
}

pub fn attack(cfg: &RunConfig, models: &[Task]) -> Result<()> {
    let dir = out_dir(cfg)?;
    let settings = AttackSettings {
        kinds: parse_kinds(&cfg.attack.attacks)?,
        pool_size: cfg.attack.pool_size,
        rare_max_freq: cfg.attack.rare_max_freq,
        aa_r_pool: match &cfg.attack.aa_r_pool_file {
            Some(p) => Some(read_lines(p)?),
            None => None,
        },
    };
    if settings.kinds.is_empty() {
        return Err(ConfigError("no attacks selected".into()).into());
    }
    let mut report = AblationReport::default();
    let mut pools = BTreeMap::new();
    for &task in models {
        if report.row(task.name()).is_some() {
            continue;
        }
        let ckpt = dir.join(artifacts::checkpoint(task.name()));
        let row = match task {
            Task::Hs => {
                let (data, _) = hs_data(cfg)?;
                let model = load_hs(&ckpt, &data.vocab)?;
                let specs = attack_specs(&model, &data.vocab, &data.train, &settings, &HS_OPPOSITE)
                    .with_context(|| pool_hint(task))?;
                pools.insert(task.name(), specs.clone());
                run_row(&AttackTarget {
                    name: task.name(),
                    model: &model,
                    vocab: &data.vocab,
                    test: &data.test,
                    specs: &specs,
                })?
            }
            Task::Sie => {
                let data = sie_data(cfg)?;
                let model = load_sie(&ckpt, &data.vocab)?;
                let specs = attack_specs(&model, &data.vocab, &data.train, &settings, &cfg.attack.sie_opposite)
                    .with_context(|| pool_hint(task))?;
                pools.insert(task.name(), specs.clone());
                run_row(&AttackTarget {
                    name: task.name(),
                    model: &model,
                    vocab: &data.vocab,
                    test: &data.test,
                    specs: &specs,
                })?
            }
        };
        report.rows.push(row);
    }
    report.write(&dir.join(artifacts::ABLATION_CSV), &dir.join(artifacts::ABLATION_TXT))?;
    write_json(&dir.join(artifacts::ATTACK_POOLS), &pools)?;
    print!("{}", report.to_text());
    Ok(())
}

pub fn build_sie(cfg: &RunConfig) -> Result<()> {
    let dir = out_dir(cfg)?;
    let (posts, _) = load_posts(cfg)?;
    let lexicon = AntonymLexicon::load(&cfg.lexicon()?)?;
    let emb = EmbeddingTable::load(&cfg.embeddings()?)?;
    let extra = match &cfg.paths.lm_sentences {
        Some(p) => read_lines(p)?.iter().filter_map(|l| tokenize(l).ok()).collect(),
        None => Vec::new(),
    };
    let config = SieBuildConfig {
        sim_threshold: cfg.sie_build.sim_threshold,
        test_frac: cfg.sie_build.test_frac,
        seed: Seeds::from_global(cfg.seed).sie_build,
        lm: cfg.sie_build.lm.clone(),
    };
    let build = build_dataset(&posts, &lexicon, &emb, &extra, &config)?;
    let path = cfg.sie_dataset();
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
    }
    write_jsonl(&path, &build.pairs)?;
    write_json(&dir.join(artifacts::SIE_STATS), &build.stats)?;
    eprintln!(
        "{} pairs ({} train, {} test)",
        build.pairs.len(),
        build.stats.train,
        build.stats.test
    );
    Ok(())
}

pub fn mine_pairs(cfg: &RunConfig) -> Result<()> {
    let dir = out_dir(cfg)?;
    let data = sie_data(cfg)?;
    let model = load_sie(&dir.join(artifacts::checkpoint("sie")), &data.vocab)?;
    let obs = collect_observations(&model, &data.train)?;
    let result = mine(
        &obs,
        MineConfig {
            min_support: cfg.mine.min_support,
            min_r: cfg.mine.min_r,
        },
    )?;
    wordpair::write_csv(&dir.join(artifacts::PAIRS_CSV), &result.stats)?;
    let text = wordpair::summary(&result, cfg.mine.top_n);
    write_text(&dir.join(artifacts::PAIRS_SUMMARY), &text)?;
    print!("{text}");
    Ok(())
}

pub fn report(cfg: &RunConfig, inputs: Vec<PathBuf>) -> Result<()> {
    let dir = out_dir(cfg)?;
    let inputs = if inputs.is_empty() {
        vec![dir.join(artifacts::ABLATION_CSV)]
    } else {
        inputs
    };
    let mut merged = AblationReport::default();
    for p in &inputs {
        let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        merged.merge(AblationReport::from_csv(&text).with_context(|| format!("in {}", p.display()))?);
    }
    let mut out = String::new();
    for task in ["hs", "sie"] {
        let p = dir.join(artifacts::metrics(task));
        if !p.exists() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p)?)?;
        let acc = |split: &str| v[split]["accuracy"].as_f64().unwrap_or(f64::NAN);
        out.push_str(&format!(
            "{task}: train accuracy {:.4}, test accuracy {:.4}\n",
            acc("train"),
            acc("test")
        ));
    }
    if !out.is_empty() {
        out.push('\n');
    }
    out.push_str(&merged.to_text());
    write_text(&dir.join(artifacts::REPORT_TXT), &out)?;
    write_text(&dir.join(artifacts::REPORT_CSV), &merged.to_csv()?)?;
    print!("{out}");
    Ok(())
}

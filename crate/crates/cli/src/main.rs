mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{ConfigError, RunConfig};

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const SYNTH_DIR: &str = "synth";
    pub const SIE_DATASET: &str = "sie_dataset.jsonl";
    pub const SIE_STATS: &str = "sie_build_stats.json";
    pub fn checkpoint(task: &str) -> String {
        format!("{task}_model.ckpt")
    }
    pub fn metrics(task: &str) -> String {
        format!("{task}_metrics.json")
    }
    pub fn eval(task: &str) -> String {
        format!("{task}_eval.json")
    }
    pub const ABLATION_CSV: &str = "ablation.csv";
    pub const ABLATION_TXT: &str = "ablation.txt";
    pub const ATTACK_POOLS: &str = "attack_pools.json";
    pub const PAIRS_CSV: &str = "wordpairs.csv";
    pub const PAIRS_SUMMARY: &str = "wordpairs_summary.txt";
    pub const REPORT_TXT: &str = "report.txt";
    pub const REPORT_CSV: &str = "report_ablation.csv";
}

#[derive(Debug, Parser)]
#[command(name = "spurio", version, about = "Audit text classifiers for spurious token reliance")]
struct Cli {
    /// TOML run configuration. Relative paths inside it resolve against its
    /// directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for every artifact.
    #[arg(long, global = true, env = "SPURIO_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Global seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Hs,
    Sie,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Hs => "hs",
            Task::Sie => "sie",
        }
    }
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Annotated corpus (CSV or JSONL).
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the synthetic corpus and its lexicon, embeddings and LM
    /// sentences.
    Synth {
        /// Destination directory (default: <out-dir>/synth).
        #[arg(long)]
        dest: Option<PathBuf>,
        #[arg(long)]
        n_posts: Option<usize>,
        #[arg(long)]
        hs_fraction: Option<f64>,
        #[arg(long)]
        p_spur: Option<f64>,
    },
    /// Train a model and write its checkpoint and metrics.
    Train {
        #[arg(long, value_enum)]
        task: Task,
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate a checkpoint on the test split.
    Eval {
        #[arg(long, value_enum)]
        task: Task,
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Also write test-set saliency maps as JSONL.
        #[arg(long)]
        saliency_out: Option<PathBuf>,
    },
    /// Run perturbation attacks and write the ablation report.
    Attack {
        /// Comma-separated subset of loo, loo-s, aa-s, aa-r, aa-q.
        #[arg(long, value_delimiter = ',')]
        attacks: Option<Vec<String>>,
        /// Models to attack, HS row first.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "hs,sie")]
        models: Vec<Task>,
        /// Words per class pool for AA-S and AA-R.
        #[arg(long)]
        pool_size: Option<usize>,
        /// Largest training frequency counted as rare for AA-R.
        #[arg(long)]
        rare_max_freq: Option<usize>,
        /// File with one word per line used as the AA-R pool for every class.
        #[arg(long)]
        aa_r_pool: Option<PathBuf>,
        #[command(flatten)]
        corpus: CorpusArgs,
    },
    /// Build the entail / neutral / contradict dataset.
    BuildSie {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        lm_sentences: Option<PathBuf>,
        /// Neutral HS pairs need group cosine below this.
        #[arg(long)]
        sim_threshold: Option<f64>,
    },
    /// Mine saliency-correlated premise/hypothesis word pairs.
    MinePairs {
        /// Pairs need more supporting examples than this.
        #[arg(long)]
        min_support: Option<usize>,
        #[arg(long)]
        min_r: Option<f64>,
        #[arg(long)]
        top_n: Option<usize>,
    },
    /// Merge metrics and ablation reports into one summary.
    Report {
        /// Ablation CSVs to merge (default: <out-dir>/ablation.csv).
        #[arg(long, num_args = 1..)]
        inputs: Vec<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.paths.out_dir = Some(d.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = load_config(&cli)?;
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    match cli.command {
        Command::Synth {
            dest,
            n_posts,
            hs_fraction,
            p_spur,
        } => {
            cfg.validate()?;
            commands::synth(&cfg, dest, n_posts, hs_fraction, p_spur)
        }
        Command::Train { task, corpus, epochs } => {
            set(&mut cfg.paths.corpus, &corpus.corpus);
            if let Some(e) = epochs {
                cfg.hs.epochs = e;
                cfg.sie.epochs = e;
            }
            cfg.validate()?;
            commands::train(&cfg, task)
        }
        Command::Eval {
            task,
            corpus,
            saliency_out,
        } => {
            set(&mut cfg.paths.corpus, &corpus.corpus);
            cfg.validate()?;
            commands::eval(&cfg, task, saliency_out)
        }
        Command::Attack {
            attacks,
            models,
            pool_size,
            rare_max_freq,
            aa_r_pool,
            corpus,
        } => {
            set(&mut cfg.paths.corpus, &corpus.corpus);
            set(&mut cfg.attack.aa_r_pool_file, &aa_r_pool);
            if let Some(a) = attacks {
                cfg.attack.attacks = a;
            }
            if let Some(k) = pool_size {
                cfg.attack.pool_size = k;
            }
            if let Some(f) = rare_max_freq {
                cfg.attack.rare_max_freq = f;
            }
            cfg.validate()?;
            commands::attack(&cfg, &models)
        }
        Command::BuildSie {
            corpus,
            lexicon,
            embeddings,
            lm_sentences,
            sim_threshold,
        } => {
            set(&mut cfg.paths.corpus, &corpus.corpus);
            set(&mut cfg.paths.lexicon, &lexicon);
            set(&mut cfg.paths.embeddings, &embeddings);
            set(&mut cfg.paths.lm_sentences, &lm_sentences);
            if let Some(t) = sim_threshold {
                cfg.sie_build.sim_threshold = t;
            }
            cfg.validate()?;
            commands::build_sie(&cfg)
        }
        Command::MinePairs {
            min_support,
            min_r,
            top_n,
        } => {
            if let Some(s) = min_support {
                cfg.mine.min_support = s;
            }
            if let Some(r) = min_r {
                cfg.mine.min_r = r;
            }
            if let Some(n) = top_n {
                cfg.mine.top_n = n;
            }
            cfg.validate()?;
            commands::mine_pairs(&cfg)
        }
        Command::Report { inputs } => commands::report(&cfg, inputs),
    }
}

/// 2 for configuration problems and missing inputs, 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    let usage = err.chain().any(|e| {
        e.is::<ConfigError>() || matches!(e.downcast_ref::<spurio_core::Error>(), Some(spurio_core::Error::MissingFile(_)))
    });
    if usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

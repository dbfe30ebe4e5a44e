//! Run configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spurio_core::attacks::SIE_OPPOSITE;
use spurio_core::corpus::{ColumnMap, Format};
use spurio_core::pipeline::{AttackSettings, DEFAULT_MIN_FREQ};
use spurio_core::sie::LmConfig;
use spurio_core::wordpair::MineConfig;
use spurio_core::TrainConfig;

/// Problems with the configuration itself. Reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<Format>,
    pub lexicon: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    /// Extra LM training sentences, one per line.
    pub lm_sentences: Option<PathBuf>,
    /// Defaults to `<out_dir>/sie_dataset.jsonl`.
    pub sie_dataset: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub test_frac: f64,
    pub min_freq: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            test_frac: 0.2,
            min_freq: DEFAULT_MIN_FREQ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SieBuildSection {
    pub sim_threshold: f64,
    pub test_frac: f64,
    pub lm: LmConfig,
}

impl Default for SieBuildSection {
    fn default() -> Self {
        Self {
            sim_threshold: 0.3,
            test_frac: 0.2,
            lm: LmConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackSection {
    pub attacks: Vec<String>,
    pub pool_size: usize,
    pub rare_max_freq: usize,
    /// Word list (one per line) used as the AA-R pool for every class.
    pub aa_r_pool_file: Option<PathBuf>,
    /// SIE class whose pool attacks each of entail, neutral, contradict.
    pub sie_opposite: [usize; 3],
}

impl Default for AttackSection {
    fn default() -> Self {
        let d = AttackSettings::default();
        Self {
            attacks: d.kinds.iter().map(|k| k.name().to_lowercase()).collect(),
            pool_size: d.pool_size,
            rare_max_freq: d.rare_max_freq,
            aa_r_pool_file: None,
            sie_opposite: SIE_OPPOSITE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MineSection {
    pub min_support: usize,
    pub min_r: f64,
    pub top_n: usize,
}

impl Default for MineSection {
    fn default() -> Self {
        let d = MineConfig::default();
        Self {
            min_support: d.min_support,
            min_r: d.min_r,
            top_n: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Global seed; every stage derives its own from it.
    pub seed: u64,
    pub paths: Paths,
    pub columns: ColumnMap,
    pub split: SplitConfig,
    /// `seed` inside the training blocks is ignored in favour of the global
    /// seed.
    pub hs: TrainConfig,
    pub sie: TrainConfig,
    pub sie_build: SieBuildSection,
    pub attack: AttackSection,
    pub mine: MineSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            paths: Paths::default(),
            columns: ColumnMap::default(),
            split: SplitConfig::default(),
            hs: TrainConfig::default(),
            sie: TrainConfig::default(),
            sie_build: SieBuildSection::default(),
            attack: AttackSection::default(),
            mine: MineSection::default(),
        }
    }
}

pub const DEFAULT_OUT_DIR: &str = "spurio-out";

impl RunConfig {
    /// Reads `path` and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.rebase(base);
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(q) = p {
                if q.is_relative() {
                    *q = base.join(&*q);
                }
            }
        };
        fix(&mut self.paths.corpus);
        fix(&mut self.paths.lexicon);
        fix(&mut self.paths.embeddings);
        fix(&mut self.paths.lm_sentences);
        fix(&mut self.paths.sie_dataset);
        fix(&mut self.paths.out_dir);
        fix(&mut self.attack.aa_r_pool_file);
    }

    pub fn out_dir(&self) -> PathBuf {
        self.paths.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }

    pub fn sie_dataset(&self) -> PathBuf {
        self.paths
            .sie_dataset
            .clone()
            .unwrap_or_else(|| self.out_dir().join(crate::artifacts::SIE_DATASET))
    }

    pub fn corpus(&self) -> Result<(PathBuf, Format), ConfigError> {
        let path = require(&self.paths.corpus, "paths.corpus")?;
        let format = self.paths.corpus_format.unwrap_or_else(|| Format::from_path(&path));
        Ok((path, format))
    }

    pub fn lexicon(&self) -> Result<PathBuf, ConfigError> {
        require(&self.paths.lexicon, "paths.lexicon")
    }

    pub fn embeddings(&self) -> Result<PathBuf, ConfigError> {
        require(&self.paths.embeddings, "paths.embeddings")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError(m));
        if !(self.split.test_frac > 0.0 && self.split.test_frac < 1.0) {
            return bad(format!("split.test_frac must be in (0, 1), got {}", self.split.test_frac));
        }
        if !(self.sie_build.test_frac > 0.0 && self.sie_build.test_frac < 1.0) {
            return bad(format!("sie_build.test_frac must be in (0, 1), got {}", self.sie_build.test_frac));
        }
        if self.split.min_freq < 1 {
            return bad("split.min_freq must be >= 1".into());
        }
        if self.attack.pool_size < 1 {
            return bad("attack.pool_size must be >= 1".into());
        }
        for (c, &o) in self.attack.sie_opposite.iter().enumerate() {
            if o > 2 || o == c {
                return bad(format!("attack.sie_opposite[{c}] must name another class, got {o}"));
            }
        }
        if self.mine.min_support < 2 {
            return bad("mine.min_support must be >= 2".into());
        }
        for (name, t) in [("hs", &self.hs), ("sie", &self.sie)] {
            t.validate().map_err(|e| ConfigError(format!("[{name}] {e}")))?;
        }
        Ok(())
    }
}

fn require(p: &Option<PathBuf>, key: &str) -> Result<PathBuf, ConfigError> {
    p.clone().ok_or_else(|| ConfigError(format!("`{key}` is not set (config file or flag)")))
}

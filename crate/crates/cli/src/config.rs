//! Experiment configuration files (TOML).
//!
//! ```toml
//! corpus = "corpus.jsonl"
//! output_dir = "runs"
//! seeds = 10
//! strategies = ["relevance_feedback", "uncertainty"]
//! batch_size = 200
//! recall_target = 0.8
//! extension_batches = 0
//! structures = ["1,1,1,1", "(10,10,1,1)"]
//!
//! [categories]
//! names = ["C15", "GCRIM"]
//!
//! [[sweeps]]
//! axis = "training"
//! x = [0, 1, 5, 10, 20]
//! ```

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail};
use serde::Deserialize;
use tarsim::{Bm25Params, CostStructure, Strategy, TrainConfig};
use tarsim::costmodel::Axis;

use crate::error::{usage, Classify, CliResult};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// JSONL corpus (`.jsonl`) or a cache written by `ingest`.
    pub corpus: PathBuf,
    pub output_dir: PathBuf,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Seeds run are `seed_offset .. seed_offset + seeds`.
    #[serde(default)]
    pub seed_offset: u64,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_recall_target")]
    pub recall_target: f64,
    #[serde(default)]
    pub extension_batches: usize,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub jobs: usize,
    /// Defaults to the six reference structures when absent.
    pub structures: Option<Vec<String>>,
    #[serde(default)]
    pub sweeps: Vec<Sweep>,
    pub subsample: Option<Subsample>,
    #[serde(default)]
    pub categories: CategorySelection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default)]
    pub classifier: ClassifierSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: String,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Either an explicit list of names, `sample_per_bin` categories drawn from
/// each of the nine inner prevalence/difficulty bins, or (neither) every
/// category in the corpus.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySelection {
    pub names: Option<Vec<String>>,
    pub sample_per_bin: Option<usize>,
    #[serde(default)]
    pub sampling_seed: u64,
    #[serde(default)]
    pub split_seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
}

impl Default for CategorySelection {
    fn default() -> Self {
        CategorySelection {
            names: None,
            sample_per_bin: None,
            sampling_seed: 0,
            split_seed: 0,
            train_fraction: default_train_fraction(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    #[serde(default = "default_k1")]
    pub k1: f64,
    #[serde(default = "default_b")]
    pub b: f64,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection { k1: default_k1(), b: default_b() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSection {
    #[serde(default = "default_l2")]
    pub l2_weight: f64,
    #[serde(default = "default_epochs")]
    pub max_epochs: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for ClassifierSection {
    fn default() -> Self {
        ClassifierSection {
            l2_weight: default_l2(),
            max_epochs: default_epochs(),
            tolerance: default_tolerance(),
        }
    }
}

fn default_seeds() -> u64 {
    10
}
fn default_strategies() -> Vec<Strategy> {
    Strategy::ALL.to_vec()
}
fn default_batch_size() -> usize {
    200
}
fn default_recall_target() -> f64 {
    0.8
}
fn default_train_fraction() -> f64 {
    0.25
}
fn default_k1() -> f64 {
    1.2
}
fn default_b() -> f64 {
    0.75
}
fn default_l2() -> f64 {
    1.0
}
fn default_epochs() -> usize {
    500
}
fn default_tolerance() -> f64 {
    1e-8
}

impl ExperimentConfig {
    /// Reads and validates a config; relative paths are resolved against
    /// the config file's directory.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).usage_ctx(format!("reading {}", path.display()))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).usage_ctx(format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.corpus = base.join(&cfg.corpus);
        cfg.output_dir = base.join(&cfg.output_dir);
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.seeds == 0 {
            bail!("seeds must be at least 1");
        }
        if self.strategies.is_empty() {
            bail!("at least one strategy is required");
        }
        if self.batch_size == 0 {
            bail!("batch_size must be at least 1");
        }
        if !(self.recall_target > 0.0 && self.recall_target <= 1.0) {
            bail!("recall_target must lie in (0, 1], got {}", self.recall_target);
        }
        if let Some(s) = &self.subsample {
            if !(s.fraction > 0.0 && s.fraction <= 1.0) {
                bail!("subsample fraction must lie in (0, 1], got {}", s.fraction);
            }
        }
        let cats = &self.categories;
        if cats.names.is_some() && cats.sample_per_bin.is_some() {
            bail!("give either categories.names or categories.sample_per_bin, not both");
        }
        if cats.sample_per_bin == Some(0) {
            bail!("categories.sample_per_bin must be at least 1");
        }
        if !(cats.train_fraction > 0.0 && cats.train_fraction < 1.0) {
            bail!("categories.train_fraction must lie in (0, 1)");
        }
        self.bm25().validate()?;
        self.train_config().validate()?;
        if self.structures()?.is_empty() {
            bail!("at least one cost structure is required");
        }
        Ok(())
    }

    pub fn bm25(&self) -> Bm25Params {
        Bm25Params { k1: self.features.k1, b: self.features.b }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            l2_weight: self.classifier.l2_weight,
            max_epochs: self.classifier.max_epochs,
            tolerance: self.classifier.tolerance,
            optimizer_seed: 0,
        }
    }

    pub fn seed_range(&self) -> std::ops::Range<u64> {
        self.seed_offset..self.seed_offset + self.seeds
    }

    /// Explicit structures followed by every sweep point, in config order.
    pub fn structures(&self) -> anyhow::Result<Vec<CostStructure>> {
        let mut out = match &self.structures {
            None => CostStructure::reference_set().to_vec(),
            Some(list) => list
                .iter()
                .map(|s| s.parse().map_err(|e| anyhow!("structure `{s}`: {e}")))
                .collect::<anyhow::Result<_>>()?,
        };
        for sweep in &self.sweeps {
            let axis: Axis = sweep.axis.parse()?;
            for &x in &sweep.x {
                if !(x >= 0.0) {
                    bail!("sweep x values must be >= 0, got {x}");
                }
                out.push(axis.at(x)?);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> anyhow::Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    #[test]
    fn defaults() {
        let cfg = parse("corpus = 'c.jsonl'\noutput_dir = 'out'\n").unwrap();
        assert_eq!(cfg.seeds, 10);
        assert_eq!(cfg.batch_size, 200);
        assert_eq!(cfg.recall_target, 0.8);
        assert_eq!(cfg.strategies, Strategy::ALL.to_vec());
        assert_eq!(cfg.structures().unwrap(), CostStructure::reference_set().to_vec());
        assert_eq!(cfg.bm25(), Bm25Params::default());
        assert_eq!(cfg.train_config(), TrainConfig::default());
    }

    #[test]
    fn sweeps_expand() {
        let cfg = parse(
            "corpus = 'c'\noutput_dir = 'o'\nstructures = []\n\
             [[sweeps]]\naxis = '(1+x,1,1+x,1)'\nx = [0, 2]\n",
        )
        .unwrap();
        let s = cfg.structures().unwrap();
        assert_eq!(s, vec![CostStructure::UNIFORM, CostStructure::new(3.0, 1.0, 3.0, 1.0).unwrap()]);
    }

    #[test]
    fn invalid_configs() {
        let base = "corpus = 'c'\noutput_dir = 'o'\n";
        assert!(parse(&format!("{base}seeds = 0\n")).is_err());
        assert!(parse(&format!("{base}strategies = []\n")).is_err());
        assert!(parse(&format!("{base}structures = []\n")).is_err());
        assert!(parse(&format!("{base}structures = ['0,1,1,1']\n")).is_err());
        assert!(parse(&format!("{base}[[sweeps]]\naxis = 'training'\nx = [-1]\n")).is_err());
        assert!(parse(&format!("{base}bogus = 1\n")).is_err());
        assert!(parse(&format!("{base}[categories]\nnames = ['a']\nsample_per_bin = 1\n")).is_err());
    }
}

//! The single TOML document that configures a run.

use std::path::{Path, PathBuf};

use minevis_core::degrade::DegradeConfig;
use minevis_core::enhance::EnhanceConfig;
use minevis_core::eval::EvalConfig;
use minevis_core::filter::FilterConfig;
use minevis_core::fusion::FusionConfig;
use minevis_core::losses::LossConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory of input PNG images.
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Ground-truth instance documents; required for evaluation and mock predictions.
    pub gt: Option<PathBuf>,
    pub pred_a: Option<PathBuf>,
    pub pred_b: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunOptions {
    /// Drop dark, blurred and duplicate frames before anything else.
    pub filter: bool,
    pub enhance: bool,
    pub overlays: bool,
    /// Perturbation levels for mock predictions when no prediction directory is given.
    pub mock_epsilon_a: f64,
    pub mock_epsilon_b: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            filter: false,
            enhance: true,
            overlays: true,
            mock_epsilon_a: 0.2,
            mock_epsilon_b: 0.2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Governs every stochastic step; copied into the degrade and fusion sections.
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub enhance: EnhanceConfig,
    pub degrade: DegradeConfig,
    pub filter: FilterConfig,
    pub fusion: FusionConfig,
    pub loss: LossConfig,
    pub eval: EvalConfig,
    pub paths: Paths,
    pub run: RunOptions,
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| AppError::Config {
            path: origin.to_path_buf(),
            source: Box::new(e),
        })?;
        let seed = cfg.seed;
        Ok(cfg.with_seed(seed))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.degrade.seed = seed;
        self.fusion.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let usage = |e: minevis_core::Error| AppError::Usage(e.to_string());
        self.enhance.validate().map_err(usage)?;
        self.degrade.validate().map_err(usage)?;
        self.filter.validate().map_err(usage)?;
        self.fusion.validate().map_err(usage)?;
        self.loss.validate().map_err(usage)?;
        if !(0.0..=1.0).contains(&self.eval.iou_threshold) {
            return Err(AppError::Usage("eval.iou_threshold must be in [0, 1]".into()));
        }
        for eps in [self.run.mock_epsilon_a, self.run.mock_epsilon_b] {
            if !(0.0..=1.0).contains(&eps) {
                return Err(AppError::Usage("mock epsilon must be in [0, 1]".into()));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML rendering, as lowercase hex.
    ///
    /// The output directory and worker count are left out: they do not change any result.
    pub fn hash(&self) -> String {
        let mut key = self.clone();
        key.paths.output = None;
        key.workers = 0;
        let canonical = toml::to_string(&key).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

//! Flat `key = value` pipeline configuration.
//!
//! ```text
//! # resources (omit to use the shipped lists)
//! segmentation_lexicon = lexicon/custom.txt
//! tag_lexicon = lexicon/tags.tsv
//! k = 3000
//! wi = 0.9
//! gamma_min = 0.5
//! seed = 42
//! ```

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluation::CvOptions;
use crate::resources::ResourcePaths;
use crate::svm::TrainConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub resources: ResourcePaths,
    pub k: usize,
    pub c: f64,
    pub wi: f64,
    pub gamma_min: f64,
    pub k_folds: usize,
    pub seed: u64,
    pub leaky_selection: bool,
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        PipelineConfig {
            resources: ResourcePaths::default(),
            k: 3000,
            c: train.c,
            wi: train.wi,
            gamma_min: 0.5,
            k_folds: 5,
            seed: train.seed,
            leaky_selection: false,
            tolerance: train.tolerance,
            max_epochs: train.max_epochs,
        }
    }
}

impl PipelineConfig {
    /// Parses config text. Relative resource paths resolve against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::parse("config", lineno, "expected `key = value`"))?;
            cfg.set(key, value, base_dir)
                .map_err(|msg| Error::parse("config", lineno, msg))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Sets one key; used both by the file parser and by CLI overrides.
    pub fn set(
        &mut self,
        key: &str,
        value: &str,
        base_dir: &Path,
    ) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("invalid value `{value}` for `{key}`"))
        }
        let path = || Some(base_dir.join(PathBuf::from(value)));
        match key {
            "segmentation_lexicon" => self.resources.segmentation_lexicon = path(),
            "terminology_lexicon" => self.resources.terminology_lexicon = path(),
            "stopwords" => self.resources.stopwords = path(),
            "ad_keywords" => self.resources.ad_keywords = path(),
            "char_map" => self.resources.char_map = path(),
            "tag_lexicon" => self.resources.tag_lexicon = path(),
            "k" => self.k = num(key, value)?,
            "c" | "C" => self.c = num(key, value)?,
            "wi" => self.wi = num(key, value)?,
            "gamma_min" => self.gamma_min = num(key, value)?,
            "k_folds" => self.k_folds = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "leaky_selection" => self.leaky_selection = num(key, value)?,
            "tolerance" => self.tolerance = num(key, value)?,
            "max_epochs" => self.max_epochs = num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.train_config().validate()?;
        if self.k == 0 {
            return Err(Error::InvalidInput("k must be at least 1".into()));
        }
        if self.k_folds < 2 {
            return Err(Error::InvalidInput("k_folds must be at least 2".into()));
        }
        if !(0.5..=1.0).contains(&self.gamma_min) {
            return Err(Error::InvalidInput(format!(
                "gamma_min must lie in [0.5, 1], got {}",
                self.gamma_min
            )));
        }
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            wi: self.wi,
            tolerance: self.tolerance,
            max_epochs: self.max_epochs,
            seed: self.seed,
        }
    }

    pub fn cv_options(&self) -> CvOptions {
        CvOptions {
            k_features: self.k,
            folds: self.k_folds,
            leaky_selection: self.leaky_selection,
            train: self.train_config(),
        }
    }
}

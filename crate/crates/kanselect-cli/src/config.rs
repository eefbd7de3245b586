//! The run configuration document: one JSON file describes the dataset,
//! selector and predictor rosters, retention levels, folds, and seed.
//! Command-line flags only override scalar fields, so the document stays the
//! single reproducibility artifact; its SHA-256 is stamped into every output.

use kanselect::baselines::SelectorSpec;
use kanselect::data::{self, ClassificationSpec, Dataset, RegressionSpec, SchemaHints};
use kanselect::pipeline;
use kanselect::predictors::{PredictorKind, PredictorSpec};
use kanselect::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        #[serde(flatten)]
        hints: SchemaHints,
    },
    SyntheticClassification(ClassificationSpec),
    SyntheticRegression(RegressionSpec),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    /// Defaults to the full nine-selector roster.
    #[serde(default = "default_selectors")]
    pub selectors: Vec<SelectorSpec>,
    /// Defaults to linear + random forest + gradient-boosted trees.
    #[serde(default = "default_predictors")]
    pub predictors: Vec<PredictorSpec>,
    #[serde(default = "default_retentions")]
    pub retentions: Vec<u32>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; absent means all processors.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_selectors() -> Vec<SelectorSpec> {
    pipeline::default_selector_roster()
        .into_iter()
        .filter(|s| s.kind != kanselect::baselines::SelectorKind::AllFeatures)
        .collect()
}

fn default_predictors() -> Vec<PredictorSpec> {
    [
        PredictorKind::Linear,
        PredictorKind::RandomForest,
        PredictorKind::GradientBoostedTrees,
    ]
    .into_iter()
    .map(PredictorSpec::of_kind)
    .collect()
}

fn default_retentions() -> Vec<u32> {
    vec![20, 40, 60]
}

fn default_folds() -> usize {
    5
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let bytes = std::fs::read(path)?;
        let config: RunConfig = serde_json::from_slice(&bytes)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.selectors.is_empty() {
            return Err(Error::InvalidConfig("selectors must not be empty".into()));
        }
        if self.predictors.is_empty() {
            return Err(Error::InvalidConfig("predictors must not be empty".into()));
        }
        if self.retentions.is_empty() {
            return Err(Error::InvalidConfig("retentions must not be empty".into()));
        }
        for &r in &self.retentions {
            if r == 0 || r > 100 {
                return Err(Error::InvalidConfig(format!(
                    "retention {r}% outside (0, 100]"
                )));
            }
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        Ok(())
    }

    /// SHA-256 over the canonical serialization of the effective (post-override)
    /// configuration, excluding fields that cannot change results
    /// (output location, worker count).
    pub fn hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.output_dir = PathBuf::new();
        semantic.workers = None;
        let bytes = serde_json::to_vec(&semantic).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        match &self.dataset {
            DatasetSource::Csv { path, hints } => data::load_csv(path, hints),
            DatasetSource::SyntheticClassification(spec) => data::make_classification(spec),
            DatasetSource::SyntheticRegression(spec) => data::make_regression(spec),
        }
    }
}

use std::path::{Path, PathBuf};

use diagfim::{Activation, Family, NaturalParamHead};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSpec {
    SyntheticGaussianBlobs,
    /// Rows `label, x_1, …, x_I` (classification) or `y_1, …, y_T, x_1, …, x_I`
    /// (regression), no header.
    ImageSubsetCsv(PathBuf),
}

fn default_train_points() -> usize {
    600
}

fn default_batch_size() -> usize {
    32
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs/latest")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub dataset: DatasetSpec,
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub epochs: usize,
    pub learning_rate: f64,
    pub n_fim_samples: usize,
    pub probe_inputs: usize,
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Synthetic datasets only.
    #[serde(default = "default_train_points")]
    pub train_points: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: Self = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::Config(msg));
        if self.epochs < 1 {
            return fail("epochs must be at least 1".into());
        }
        if self.n_fim_samples < 2 {
            return fail("n_fim_samples must be at least 2".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive and finite".into());
        }
        if self.layer_dims.len() < 2 || self.layer_dims.contains(&0) {
            return fail("layer_dims needs at least two positive widths".into());
        }
        if self.probe_inputs < 1 {
            return fail("probe_inputs must be at least 1".into());
        }
        if self.batch_size < 1 {
            return fail("batch_size must be at least 1".into());
        }
        if self.dataset == DatasetSpec::SyntheticGaussianBlobs && self.train_points < 1 {
            return fail("train_points must be at least 1".into());
        }
        if self.task == Task::Classification && self.output_dim() < 2 {
            return fail("classification needs at least two output classes".into());
        }
        self.head().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn family(&self) -> Family {
        match self.task {
            Task::Classification => Family::Categorical,
            Task::Regression => Family::IsotropicGaussian,
        }
    }

    pub fn head(&self) -> diagfim::Result<NaturalParamHead> {
        NaturalParamHead::new(self.family(), self.output_dim())
    }
}

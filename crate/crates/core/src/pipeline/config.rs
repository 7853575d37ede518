use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::LabelEncoding;
use crate::error::{Error, Result};
use crate::gbt::{Objective, TrainParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Binary,
    Multiclass,
}

/// How test rows are held out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Stratified k-fold; every row is tested exactly once.
    Cv,
    /// One stratified train/test split of `holdout_fraction`.
    Holdout,
}

/// How the feature ranking is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    /// Descending ANOVA F score on the training rows.
    Anova,
    /// Seeded random permutation; a baseline for ablations.
    Random,
}

/// Every parameter of an experiment. Deserialises from a flat TOML file;
/// missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub task: Task,
    pub protocol: Protocol,
    /// Class name treated as positive; defaults to the class whose name
    /// contains "covid" (case-insensitive), else class 0.
    pub positive_class: Option<String>,
    pub folds: usize,
    pub seed: u64,
    /// Fixed feature count; when absent the count is chosen by the sweep.
    pub n_features: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    pub k_step: usize,
    pub val_fraction: f64,
    pub holdout_fraction: f64,
    /// Run the sweep once on the whole dataset instead of inside each fold.
    pub global_sweep: bool,
    pub selection: Selection,
    pub eta: f64,
    pub rounds: usize,
    pub max_depth: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub min_child_weight: f64,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainParams::default();
        Self {
            input: PathBuf::from("features.csv"),
            task: Task::Binary,
            protocol: Protocol::Cv,
            positive_class: None,
            folds: 5,
            seed: 42,
            n_features: None,
            k_min: 50,
            k_max: 500,
            k_step: 1,
            val_fraction: 0.2,
            holdout_fraction: 0.2,
            global_sweep: false,
            selection: Selection::Anova,
            eta: train.eta,
            rounds: train.rounds,
            max_depth: train.max_depth,
            lambda: train.lambda,
            gamma: train.gamma,
            min_child_weight: train.min_child_weight,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            eta: self.eta,
            rounds: self.rounds,
            max_depth: self.max_depth,
            lambda: self.lambda,
            gamma: self.gamma,
            min_child_weight: self.min_child_weight,
            seed: self.seed,
        }
    }

    /// Feature counts tried by the sweep.
    pub fn sweep_grid(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).step_by(self.k_step.max(1)).collect()
    }

    /// Checks parameters that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.protocol == Protocol::Cv && self.folds < 2 {
            return bad(format!("folds must be at least 2, got {}", self.folds));
        }
        if self.n_features == Some(0) {
            return bad("n_features must be at least 1".into());
        }
        if self.n_features.is_none() {
            if self.k_min == 0 || self.k_step == 0 {
                return bad("k_min and k_step must be at least 1".into());
            }
            if self.k_min > self.k_max {
                return bad(format!("k_min {} exceeds k_max {}", self.k_min, self.k_max));
            }
        }
        for (name, v) in [
            ("val_fraction", self.val_fraction),
            ("holdout_fraction", self.holdout_fraction),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        self.train_params()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks parameters against a loaded dataset with `d` features.
    pub fn validate_for(&self, d: usize) -> Result<()> {
        self.validate()?;
        match self.n_features {
            Some(k) if k > d => Err(Error::Config(format!(
                "n_features {k} exceeds the {d} available features"
            ))),
            None if self.k_max > d => Err(Error::Config(format!(
                "sweep upper bound k_max = {} exceeds the {d} available features",
                self.k_max
            ))),
            _ => Ok(()),
        }
    }

    pub fn objective(&self, n_classes: usize) -> Result<Objective> {
        match self.task {
            Task::Binary if n_classes == 2 => Ok(Objective::BinaryLogistic),
            Task::Binary => Err(Error::Config(format!(
                "binary task needs exactly 2 classes, found {n_classes}"
            ))),
            Task::Multiclass if n_classes >= 2 => Objective::softmax(n_classes),
            Task::Multiclass => Err(Error::Config(format!(
                "multiclass task needs at least 2 classes, found {n_classes}"
            ))),
        }
    }

    /// Resolves the positive class against the dataset's classes.
    pub fn positive_class_id(&self, encoding: &LabelEncoding) -> Result<usize> {
        match &self.positive_class {
            Some(name) => encoding.id(name).ok_or_else(|| {
                Error::Config(format!(
                    "positive class {name:?} not among {:?}",
                    encoding.classes()
                ))
            }),
            None => Ok(encoding
                .classes()
                .iter()
                .position(|c| c.to_lowercase().contains("covid"))
                .unwrap_or(0)),
        }
    }
}

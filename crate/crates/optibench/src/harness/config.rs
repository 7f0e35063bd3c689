//! Experiment and comparison configs, JSON in, strictly validated.
//!
//! Unknown keys anywhere in a config document are a hard parse error,
//! so a typo in a hyperparameter name can never be silently ignored.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::objectives::{
    make_dataset, MlpModel, MlpObjective, Objective, QuadraticObjective, RosenbrockObjective,
    SyntheticDataset,
};
use crate::optimizers::{HyperParams, OptimizerKind};
use crate::schedule::ScheduleUnit;

fn default_batch_size() -> usize {
    32
}

fn default_epochs() -> usize {
    3
}

fn default_seeds() -> Vec<u64> {
    vec![42]
}

fn default_optimizers() -> Vec<OptimizerKind> {
    OptimizerKind::ALL.to_vec()
}

/// Diagonal quadratic bowl parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadraticSpec {
    pub dim: usize,
    pub condition_number: f64,
}

impl Default for QuadraticSpec {
    fn default() -> Self {
        Self {
            dim: 10,
            condition_number: 1000.0,
        }
    }
}

/// Synthetic classification task parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticMlpSpec {
    /// Dataset rows (80/20 train/validation split).
    pub n: usize,
    /// Feature dimension.
    pub d: usize,
    /// Hidden layer width.
    pub hidden: usize,
    /// Class-conditional noise level.
    pub noise: f64,
    /// Dropout rate in train mode.
    pub dropout: f64,
    /// Seed of the dataset itself; experiment seeds only drive init,
    /// shuffling, and dropout, so every run sees the same task.
    pub data_seed: u64,
}

impl Default for SyntheticMlpSpec {
    fn default() -> Self {
        Self {
            n: 1000,
            d: 20,
            hidden: 8,
            noise: 1.0,
            dropout: 0.1,
            data_seed: 42,
        }
    }
}

/// Which problem an experiment trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    Quadratic(QuadraticSpec),
    Rosenbrock,
    SyntheticMlp(SyntheticMlpSpec),
}

impl ObjectiveSpec {
    pub fn is_classification(&self) -> bool {
        matches!(self, ObjectiveSpec::SyntheticMlp(_))
    }

    /// Builds the analytic objective, when this spec names one.
    pub fn build_analytic(&self) -> Result<Option<Box<dyn Objective + Send + Sync>>> {
        match self {
            ObjectiveSpec::Quadratic(q) => Ok(Some(Box::new(
                QuadraticObjective::with_condition_number(q.dim, q.condition_number)?,
            ))),
            ObjectiveSpec::Rosenbrock => Ok(Some(Box::new(RosenbrockObjective::new()))),
            ObjectiveSpec::SyntheticMlp(_) => Ok(None),
        }
    }

    /// Builds the dataset and model for the classification task.
    pub fn build_classification(&self) -> Result<Option<(SyntheticDataset, MlpObjective)>> {
        match self {
            ObjectiveSpec::SyntheticMlp(spec) => {
                let dataset = make_dataset(spec.data_seed, spec.n, spec.d, spec.noise)?;
                let model = MlpModel::new(spec.d, spec.hidden, spec.dropout)?;
                Ok(Some((dataset, MlpObjective::new(model))))
            }
            _ => Ok(None),
        }
    }
}

/// One training run: an objective, an optimizer, and a budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub objective: ObjectiveSpec,
    pub optimizer: OptimizerKind,
    #[serde(default)]
    pub hyperparams: HyperParams,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// For analytic objectives one epoch is a single full-gradient step.
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Validation cadence in steps; `null` evaluates at each epoch end.
    #[serde(default)]
    pub eval_every: Option<u64>,
    /// Whether the composite decay exponent counts epochs or steps.
    #[serde(default)]
    pub schedule_unit: ScheduleUnit,
    /// Where reports land; not part of the experiment's identity.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(objective: ObjectiveSpec, optimizer: OptimizerKind) -> Self {
        Self {
            objective,
            optimizer,
            hyperparams: HyperParams::default(),
            batch_size: default_batch_size(),
            epochs: default_epochs(),
            seeds: default_seeds(),
            eval_every: None,
            schedule_unit: ScheduleUnit::default(),
            out_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must be nonempty".into()));
        }
        self.hyperparams.validate()
    }

    /// Stable hex digest of the canonicalized config (defaults filled
    /// in, fixed field order, output path excluded).
    pub fn fingerprint(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The config of a single `(optimizer, seed)` cell.
    pub fn cell(&self, seed: u64) -> Self {
        Self {
            seeds: vec![seed],
            ..self.clone()
        }
    }
}

/// A multi-optimizer comparison: shared task, budget, and seeds, one run
/// per `(optimizer, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub objective: ObjectiveSpec,
    #[serde(default = "default_optimizers")]
    pub optimizers: Vec<OptimizerKind>,
    #[serde(default)]
    pub hyperparams: HyperParams,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub eval_every: Option<u64>,
    #[serde(default)]
    pub schedule_unit: ScheduleUnit,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ComparisonConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.optimizers.is_empty() {
            return Err(Error::InvalidConfig("optimizers must be nonempty".into()));
        }
        for (i, kind) in self.optimizers.iter().enumerate() {
            if self.optimizers[..i].contains(kind) {
                return Err(Error::InvalidConfig(format!(
                    "duplicate optimizer {kind} in comparison"
                )));
            }
        }
        if !self.objective.is_classification() {
            return Err(Error::InvalidConfig(
                "comparison tables report accuracy and F1; use the synthetic_mlp objective".into(),
            ));
        }
        self.experiment_for(self.optimizers[0]).validate()
    }

    /// The per-cell experiment config for one optimizer kind.
    pub fn experiment_for(&self, optimizer: OptimizerKind) -> ExperimentConfig {
        ExperimentConfig {
            objective: self.objective.clone(),
            optimizer,
            hyperparams: self.hyperparams,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seeds: self.seeds.clone(),
            eval_every: self.eval_every,
            schedule_unit: self.schedule_unit,
            out_dir: self.out_dir.clone(),
        }
    }
}

//! From-scratch first-order optimizers and a deterministic benchmark
//! harness.
//!
//! Six update rules are implemented as pure state transitions: SGD,
//! heavy-ball Momentum, AdaGrad, RMSProp, Adam, and a composite scheme
//! that drives Adam with an exponentially decayed learning rate on a
//! norm-clipped gradient. Around them sits the machinery to compare
//! them reproducibly: analytic test objectives, a synthetic
//! ill-conditioned classification task trained by a manually
//! backpropagated MLP, accuracy/F1 metrics, and an experiment runner
//! whose every emitted number is a pure function of the config and
//! seed.

// validators use `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod clip;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod objectives;
pub mod optimizers;
pub mod param_store;
pub mod schedule;

pub use clip::{clip_gradient, ClipConfig};
pub use error::{Error, Result};
pub use harness::{
    emit_report, run_comparison, run_experiment, ComparisonConfig, ComparisonTable,
    ExperimentConfig, ObjectiveSpec, ReportFormat, RunRecord,
};
pub use metrics::{accuracy, f1_score, ConfusionCounts};
pub use objectives::{
    make_dataset, minibatch_iter, mlp_eval, Batch, MlpModel, MlpObjective, Objective,
    QuadraticObjective, RosenbrockObjective, SyntheticDataset,
};
pub use optimizers::{
    adagrad_step, adam_step, composite_step, init_state, momentum_step, rmsprop_step, sgd_step,
    step, HyperParams, OptimizerKind, OptimizerState, StepReport,
};
pub use param_store::{axpy, rng_uniform, ParamVector, Rng};
pub use schedule::{decayed_lr, Schedule, ScheduleKind, ScheduleUnit};

//! Deterministic experiment runner and multi-optimizer comparison.
//!
//! A run is fully determined by its config and seed: the experiment seed
//! derives labeled child streams for weight init, batch shuffling, and
//! dropout, so the emitted numbers are reproducible bit for bit. Cells
//! of a comparison are independent and may execute on a thread pool; the
//! collected table is identical regardless of scheduling.

mod config;
mod report;

pub use config::{
    ComparisonConfig, ExperimentConfig, ObjectiveSpec, QuadraticSpec, SyntheticMlpSpec,
};
pub use report::{
    emit_report, parse_summary_csv, render_summary_csv, render_text_table, render_trajectories_csv,
    ReportFormat, SummaryRow,
};

use rayon::prelude::*;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics::{accuracy, f1_score, ConfusionCounts};
use crate::objectives::{
    batches_per_epoch, minibatch_iter, mlp_predict, Batch, MlpObjective, Mode, Objective,
    SyntheticDataset,
};
use crate::optimizers::{init_state, step, OptimizerKind};
use crate::param_store::{ParamVector, Rng};
use crate::schedule::ScheduleUnit;

/// One validation measurement during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    /// Completed optimizer steps at measurement time.
    pub step: u64,
    /// Loss over the full training split (no dropout).
    pub train_loss: f64,
    /// Loss over the validation split.
    pub val_loss: f64,
    /// Validation accuracy; absent for analytic objectives.
    pub val_accuracy: Option<f64>,
    /// Validation F1; absent for analytic objectives.
    pub val_f1: Option<f64>,
    /// Learning rate applied by the most recent step.
    pub effective_lr: f64,
    /// Clipping events so far.
    pub clip_event_count: u64,
}

/// Everything measured in one `(optimizer, seed)` cell.
///
/// Equality ignores `wall_secs`; wall-clock is informational only and
/// never part of determinism checks or emitted CSV.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub fingerprint: String,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub eval_points: Vec<EvalPoint>,
    pub final_train_loss: f64,
    pub final_val_loss: f64,
    pub final_accuracy: Option<f64>,
    pub final_f1: Option<f64>,
    pub total_steps: u64,
    pub clip_events: u64,
    pub wall_secs: f64,
}

impl PartialEq for RunRecord {
    fn eq(&self, other: &Self) -> bool {
        self.fingerprint == other.fingerprint
            && self.optimizer == other.optimizer
            && self.seed == other.seed
            && self.eval_points == other.eval_points
            && self.final_train_loss == other.final_train_loss
            && self.final_val_loss == other.final_val_loss
            && self.final_accuracy == other.final_accuracy
            && self.final_f1 == other.final_f1
            && self.total_steps == other.total_steps
            && self.clip_events == other.clip_events
    }
}

/// One row of the comparison table: mean and std over seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub optimizer: OptimizerKind,
    pub mean_acc: f64,
    pub std_acc: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
    /// Flags the row with the highest mean accuracy.
    pub best: bool,
}

/// Comparison results in the canonical row order
/// (SGD, Momentum, AdaGrad, RMSProp, Adam, Composite).
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub seeds: Vec<u64>,
}

enum Problem {
    Analytic(Box<dyn Objective + Send + Sync>),
    Classification {
        train_objective: MlpObjective,
        eval_objective: MlpObjective,
        dataset: SyntheticDataset,
    },
}

impl Problem {
    fn build(spec: &ObjectiveSpec) -> Result<Self> {
        if let Some((dataset, objective)) = spec.build_classification()? {
            let eval_objective = MlpObjective::new(objective.model().in_mode(Mode::Eval));
            return Ok(Problem::Classification {
                train_objective: objective,
                eval_objective,
                dataset,
            });
        }
        let objective = spec
            .build_analytic()?
            .expect("spec is either analytic or classification");
        Ok(Problem::Analytic(objective))
    }

    fn steps_per_epoch(&self, batch_size: usize) -> usize {
        match self {
            Problem::Analytic(_) => 1,
            Problem::Classification { dataset, .. } => {
                batches_per_epoch(dataset.n_train(), batch_size)
            }
        }
    }
}

fn guard_finite(
    quantity: &'static str,
    value_ok: bool,
    global_step: u64,
    theta: &ParamVector,
    grad_norm: f64,
) -> Result<()> {
    if value_ok {
        return Ok(());
    }
    let theta_norm = theta
        .data()
        .iter()
        .map(|x| if x.is_finite() { x * x } else { f64::INFINITY })
        .sum::<f64>()
        .sqrt();
    Err(Error::NonFinite {
        quantity,
        step: global_step,
        theta_norm,
        grad_norm,
    })
}

struct Evaluation {
    train_loss: f64,
    val_loss: f64,
    val_accuracy: Option<f64>,
    val_f1: Option<f64>,
}

fn evaluate(problem: &Problem, theta: &ParamVector) -> Result<Evaluation> {
    // eval paths draw nothing from any training stream
    let mut scratch_rng = Rng::new(0);
    match problem {
        Problem::Analytic(objective) => {
            let (loss, _) = objective.eval(theta, None, &mut scratch_rng)?;
            Ok(Evaluation {
                train_loss: loss,
                val_loss: loss,
                val_accuracy: None,
                val_f1: None,
            })
        }
        Problem::Classification {
            eval_objective,
            dataset,
            ..
        } => {
            let train_batch = dataset.train_batch()?;
            let val_batch = dataset.val_batch()?;
            let (train_loss, _) =
                eval_objective.eval(theta, Some(&train_batch), &mut scratch_rng)?;
            let (val_loss, _) = eval_objective.eval(theta, Some(&val_batch), &mut scratch_rng)?;
            let predictions = mlp_predict(eval_objective.model(), theta, &val_batch)?;
            let counts = ConfusionCounts::from_predictions(&predictions, val_batch.labels())?;
            Ok(Evaluation {
                train_loss,
                val_loss,
                val_accuracy: Some(accuracy(&counts)?),
                val_f1: Some(f1_score(&counts)?),
            })
        }
    }
}

/// Trains one `(optimizer, seed)` cell and collects its record.
///
/// Aborts with a diagnostic as soon as any loss, gradient, or parameter
/// turns non-finite.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let problem = Problem::build(&cfg.objective)?;

    let root = Rng::new(seed);
    let mut init_rng = root.derive("init");
    let mut shuffle_rng = root.derive("shuffle");
    let mut dropout_rng = root.derive("dropout");

    let mut theta = match &problem {
        Problem::Analytic(objective) => objective.initial_params(&mut init_rng),
        Problem::Classification {
            train_objective, ..
        } => train_objective.initial_params(&mut init_rng),
    };
    let mut state = init_state(cfg.optimizer, theta.shape());

    let steps_per_epoch = problem.steps_per_epoch(cfg.batch_size) as u64;
    let total_budget = cfg.epochs as u64 * steps_per_epoch;
    let mut eval_points: Vec<EvalPoint> = Vec::new();
    let mut global_step: u64 = 0;
    let mut clip_events: u64 = 0;
    let mut effective_lr = cfg.hyperparams.eta0;

    let record_eval = |theta: &ParamVector,
                       eval_points: &mut Vec<EvalPoint>,
                       completed: u64,
                       effective_lr: f64,
                       clip_events: u64|
     -> Result<()> {
        if eval_points.last().map(|p| p.step) == Some(completed) {
            return Ok(());
        }
        let eval = evaluate(&problem, theta)?;
        eval_points.push(EvalPoint {
            step: completed,
            train_loss: eval.train_loss,
            val_loss: eval.val_loss,
            val_accuracy: eval.val_accuracy,
            val_f1: eval.val_f1,
            effective_lr,
            clip_event_count: clip_events,
        });
        Ok(())
    };

    for epoch in 0..cfg.epochs {
        let batches: Vec<Option<Batch>> = match &problem {
            Problem::Analytic(_) => vec![None],
            Problem::Classification { dataset, .. } => {
                minibatch_iter(dataset, cfg.batch_size, &mut shuffle_rng)?
                    .map(Some)
                    .collect()
            }
        };
        for (batch_idx, batch) in batches.iter().enumerate() {
            let (loss, grad) = match &problem {
                Problem::Analytic(objective) => objective.eval(&theta, None, &mut dropout_rng)?,
                Problem::Classification {
                    train_objective, ..
                } => train_objective.eval(&theta, batch.as_ref(), &mut dropout_rng)?,
            };
            let grad_norm = grad.l2_norm()?;
            guard_finite("loss", loss.is_finite(), global_step, &theta, grad_norm)?;
            guard_finite(
                "gradient",
                grad.all_finite(),
                global_step,
                &theta,
                grad_norm,
            )?;

            let schedule_t = match cfg.schedule_unit {
                ScheduleUnit::PerEpoch => epoch as u32,
                ScheduleUnit::PerStep => global_step as u32,
            };
            let report = step(&mut state, &mut theta, &grad, &cfg.hyperparams, schedule_t)?;
            guard_finite(
                "parameters",
                theta.all_finite(),
                global_step,
                &theta,
                grad_norm,
            )?;

            global_step += 1;
            effective_lr = report.effective_lr;
            clip_events += u64::from(report.clipped);

            let due = match cfg.eval_every {
                Some(k) => k > 0 && global_step.is_multiple_of(k),
                None => batch_idx + 1 == batches.len(),
            };
            if due {
                record_eval(
                    &theta,
                    &mut eval_points,
                    global_step,
                    effective_lr,
                    clip_events,
                )?;
            }
        }
    }
    debug_assert_eq!(global_step, total_budget);
    record_eval(
        &theta,
        &mut eval_points,
        global_step,
        effective_lr,
        clip_events,
    )?;

    let last = eval_points.last().expect("final eval always recorded");
    Ok(RunRecord {
        fingerprint: cfg.cell(seed).fingerprint(),
        optimizer: cfg.optimizer,
        seed,
        final_train_loss: last.train_loss,
        final_val_loss: last.val_loss,
        final_accuracy: last.val_accuracy,
        final_f1: last.val_f1,
        total_steps: global_step,
        clip_events,
        eval_points,
        wall_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs every seed of the config sequentially.
pub fn run_all_seeds(cfg: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    cfg.seeds.iter().map(|&s| run_experiment(cfg, s)).collect()
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Trains every `(optimizer, seed)` cell of a comparison and aggregates
/// the table. Cells run in parallel; ordering of the output is fixed by
/// the canonical kind order and the seed list.
pub fn run_comparison(cfg: &ComparisonConfig) -> Result<(ComparisonTable, Vec<RunRecord>)> {
    cfg.validate()?;
    let mut kinds = cfg.optimizers.clone();
    kinds.sort_by_key(|k| k.order());

    let cells: Vec<(OptimizerKind, u64)> = kinds
        .iter()
        .flat_map(|&kind| cfg.seeds.iter().map(move |&seed| (kind, seed)))
        .collect();
    let results: Vec<Result<RunRecord>> = cells
        .par_iter()
        .map(|&(kind, seed)| run_experiment(&cfg.experiment_for(kind), seed))
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for result in results {
        records.push(result?);
    }

    let mut rows = Vec::with_capacity(kinds.len());
    for &kind in &kinds {
        let accs: Vec<f64> = records
            .iter()
            .filter(|r| r.optimizer == kind)
            .map(|r| r.final_accuracy.expect("classification run has accuracy"))
            .collect();
        let f1s: Vec<f64> = records
            .iter()
            .filter(|r| r.optimizer == kind)
            .map(|r| r.final_f1.expect("classification run has F1"))
            .collect();
        let (mean_acc, std_acc) = mean_and_std(&accs);
        let (mean_f1, std_f1) = mean_and_std(&f1s);
        rows.push(ComparisonRow {
            optimizer: kind,
            mean_acc,
            std_acc,
            mean_f1,
            std_f1,
            best: false,
        });
    }
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| {
            (a.mean_acc, a.mean_f1)
                .partial_cmp(&(b.mean_acc, b.mean_f1))
                .expect("metric means are finite")
        })
        .map(|(i, _)| i)
        .expect("at least one row");
    rows[best].best = true;

    Ok((
        ComparisonTable {
            rows,
            seeds: cfg.seeds.clone(),
        },
        records,
    ))
}

//! `optibench`: train and compare optimizers from JSON configs.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure,
//! 4 I/O error.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use optibench::harness::{
    emit_report, render_summary_csv, render_text_table, render_trajectories_csv, run_all_seeds,
    run_comparison, ComparisonConfig, ExperimentConfig, ReportFormat, RunRecord,
};
use optibench::objectives::gradcheck::check_point;
use optibench::objectives::{
    make_dataset, MlpModel, MlpObjective, Objective, QuadraticObjective, RosenbrockObjective,
};
use optibench::param_store::{ParamVector, Rng};
use optibench::{Error, OptimizerKind};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

#[derive(Parser)]
#[command(
    name = "optibench",
    version,
    about = "Deterministic optimizer benchmarking: SGD, Momentum, AdaGrad, RMSProp, Adam, and a composite Adam + decay + clipping scheme"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single experiment from a JSON config
    Run(RunArgs),
    /// Run one cell per optimizer and emit the comparison table
    Compare(CompareArgs),
    /// List the available optimizer identifiers
    ListOptimizers,
    /// Audit analytic gradients against central finite differences
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to an experiment config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list with a single seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Stdout rendering: csv or table
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct CompareArgs {
    /// Path to a comparison config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list with a single seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Stdout rendering: csv or table
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Objective to audit: quadratic, rosenbrock, or mlp
    #[arg(long)]
    objective: String,
    /// Seed for probe points
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::NonFinite { .. } => EXIT_NUMERICAL,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ListOptimizers => cmd_list_optimizers(),
        Command::Gradcheck(args) => cmd_gradcheck(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn print_run_summary(record: &RunRecord) {
    let metrics = match (record.final_accuracy, record.final_f1) {
        (Some(acc), Some(f1)) => format!(" val_acc={acc:.4} val_f1={f1:.4}"),
        _ => String::new(),
    };
    println!(
        "{} seed={} steps={} final_train_loss={:.6e} final_val_loss={:.6e}{} clip_events={} ({:.2}s)",
        record.optimizer,
        record.seed,
        record.total_steps,
        record.final_train_loss,
        record.final_val_loss,
        metrics,
        record.clip_events,
        record.wall_secs
    );
}

fn cmd_run(args: RunArgs) -> Result<u8, Error> {
    let format: ReportFormat = args.format.parse()?;
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(dir) = args.out_dir {
        cfg.out_dir = Some(dir);
    }
    let records = run_all_seeds(&cfg)?;
    match format {
        ReportFormat::Csv => print!("{}", render_summary_csv(&records)?),
        ReportFormat::TextTable => {
            for record in &records {
                print_run_summary(record);
            }
        }
    }
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.clone(),
            source: e,
        })?;
        let summary_path = dir.join("summary.csv");
        std::fs::write(&summary_path, render_summary_csv(&records)?).map_err(|e| Error::Io {
            path: summary_path.clone(),
            source: e,
        })?;
        let traj_path = dir.join("trajectories.csv");
        std::fs::write(&traj_path, render_trajectories_csv(&records)?).map_err(|e| Error::Io {
            path: traj_path.clone(),
            source: e,
        })?;
        eprintln!(
            "wrote {} and {}",
            summary_path.display(),
            traj_path.display()
        );
    }
    Ok(0)
}

fn cmd_compare(args: CompareArgs) -> Result<u8, Error> {
    let format: ReportFormat = args.format.parse()?;
    let mut cfg = ComparisonConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seeds = vec![seed];
    }
    if let Some(dir) = args.out_dir {
        cfg.out_dir = Some(dir);
    }
    let (table, records) = run_comparison(&cfg)?;
    match format {
        ReportFormat::Csv => print!("{}", render_summary_csv(&records)?),
        ReportFormat::TextTable => print!("{}", render_text_table(&table)?),
    }
    if let Some(dir) = &cfg.out_dir {
        let mut written = emit_report(&table, &records, ReportFormat::Csv, dir)?;
        written.extend(emit_report(&table, &records, ReportFormat::TextTable, dir)?);
        written.sort();
        written.dedup();
        for path in written {
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(0)
}

fn cmd_list_optimizers() -> Result<u8, Error> {
    for kind in OptimizerKind::ALL {
        let note = match kind {
            OptimizerKind::Sgd => "fixed learning rate",
            OptimizerKind::Momentum => "heavy-ball velocity",
            OptimizerKind::AdaGrad => "accumulated squared gradients",
            OptimizerKind::RmsProp => "moving average of squared gradients",
            OptimizerKind::Adam => "bias-corrected first and second moments",
            OptimizerKind::Composite => "Adam + exponential LR decay + gradient clipping",
        };
        println!("{:<10} {} ({note})", kind.id(), kind);
    }
    Ok(0)
}

fn cmd_gradcheck(args: GradcheckArgs) -> Result<u8, Error> {
    const POINTS: usize = 20;
    let mut point_rng = Rng::new(args.seed).derive("gradcheck-points");
    let mask_rng = Rng::new(args.seed).derive("gradcheck-masks");

    let (objective, batch, tolerance): (Box<dyn Objective>, _, f64) = match args.objective.as_str()
    {
        "quadratic" => (
            Box::new(QuadraticObjective::with_condition_number(10, 1000.0)?),
            None,
            1e-6,
        ),
        "rosenbrock" => (Box::new(RosenbrockObjective::new()), None, 1e-6),
        "mlp" => {
            let dataset = make_dataset(args.seed, 100, 20, 1.0)?;
            let model = MlpModel::new(20, 8, 0.1)?;
            (
                Box::new(MlpObjective::new(model)),
                Some(dataset.train_batch()?),
                1e-5,
            )
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown objective {other:?} (expected quadratic, rosenbrock, or mlp)"
            )))
        }
    };

    let mut worst = 0.0f64;
    for point in 0..POINTS {
        let theta = if args.objective == "mlp" {
            let model = MlpModel::new(20, 8, 0.1)?;
            model.init_params(&mut point_rng)
        } else {
            let n = objective.param_count();
            ParamVector::flat((0..n).map(|_| 4.0 * point_rng.next_f64() - 2.0).collect())
        };
        let check = check_point(objective.as_ref(), &theta, batch.as_ref(), &mask_rng)?;
        println!(
            "point {point:>2}: max rel err {:.3e} (coord {})",
            check.max_rel_err, check.worst_coord
        );
        worst = worst.max(check.max_rel_err);
    }
    let pass = worst < tolerance;
    println!(
        "gradcheck {}: worst rel err {:.3e} over {POINTS} points, tolerance {tolerance:.0e} -> {}",
        objective.name(),
        worst,
        if pass { "PASS" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_NUMERICAL })
}

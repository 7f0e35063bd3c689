//! Report rendering: per-run CSV, loss-trajectory CSV, and a text table.
//!
//! Floats are written with the shortest round-trippable representation,
//! so re-parsing an emitted CSV reproduces the in-memory values exactly
//! and identical runs emit byte-identical files. Wall-clock never
//! appears in any output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::harness::{ComparisonTable, RunRecord};
use crate::optimizers::OptimizerKind;

pub const SUMMARY_HEADER: &str = "optimizer,seed,acc,f1,final_loss,steps,clip_events";
pub const TRAJECTORY_HEADER: &str = "optimizer,seed,step,train_loss,val_loss,effective_lr";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    TextTable,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" | "text-table" => Ok(ReportFormat::TextTable),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?} (expected csv or table)"
            ))),
        }
    }
}

fn opt_f64(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// One `(optimizer, seed)` summary row, `SUMMARY_HEADER` schema.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub optimizer: OptimizerKind,
    pub seed: u64,
    pub acc: Option<f64>,
    pub f1: Option<f64>,
    pub final_loss: f64,
    pub steps: u64,
    pub clip_events: u64,
}

impl SummaryRow {
    fn of(record: &RunRecord) -> Self {
        Self {
            optimizer: record.optimizer,
            seed: record.seed,
            acc: record.final_accuracy,
            f1: record.final_f1,
            final_loss: record.final_train_loss,
            steps: record.total_steps,
            clip_events: record.clip_events,
        }
    }
}

/// Renders the per-run summary CSV.
pub fn render_summary_csv(records: &[RunRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in records {
        let row = SummaryRow::of(r);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.optimizer.id(),
            row.seed,
            opt_f64(row.acc),
            opt_f64(row.f1),
            row.final_loss,
            row.steps,
            row.clip_events
        );
    }
    Ok(out)
}

/// Parses a summary CSV back into rows; the inverse of
/// [`render_summary_csv`].
pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != SUMMARY_HEADER {
        return Err(Error::Parse {
            what: "summary csv".into(),
            detail: format!("unexpected header {header:?}"),
        });
    }
    let parse_field = |field: &str, line: usize| -> Result<f64> {
        field.parse().map_err(|e| Error::Parse {
            what: "summary csv".into(),
            detail: format!("line {line}: {e}"),
        })
    };
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(Error::Parse {
                what: "summary csv".into(),
                detail: format!("line {}: expected 7 fields", i + 2),
            });
        }
        let opt = |f: &str| -> Result<Option<f64>> {
            if f.is_empty() {
                Ok(None)
            } else {
                parse_field(f, i + 2).map(Some)
            }
        };
        rows.push(SummaryRow {
            optimizer: fields[0].parse()?,
            seed: fields[1].parse().map_err(|e| Error::Parse {
                what: "summary csv".into(),
                detail: format!("line {}: {e}", i + 2),
            })?,
            acc: opt(fields[2])?,
            f1: opt(fields[3])?,
            final_loss: parse_field(fields[4], i + 2)?,
            steps: fields[5].parse().map_err(|e| Error::Parse {
                what: "summary csv".into(),
                detail: format!("line {}: {e}", i + 2),
            })?,
            clip_events: fields[6].parse().map_err(|e| Error::Parse {
                what: "summary csv".into(),
                detail: format!("line {}: {e}", i + 2),
            })?,
        });
    }
    Ok(rows)
}

/// Renders the long-form loss-trajectory CSV.
pub fn render_trajectories_csv(records: &[RunRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for r in records {
        for p in &r.eval_points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.optimizer.id(),
                r.seed,
                p.step,
                p.train_loss,
                p.val_loss,
                p.effective_lr
            );
        }
    }
    Ok(out)
}

/// Renders the comparison table in the `Model | Acc | F1 score` layout,
/// one row per optimizer in the canonical order, best row starred.
pub fn render_text_table(table: &ComparisonTable) -> Result<String> {
    if table.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = String::new();
    let header = format!("{:<10} | {:<17} | {:<17}", "Model", "Acc", "F1 score");
    let _ = writeln!(out, "{}", header.trim_end());
    let _ = writeln!(out, "{:-<10}-+-{:-<17}-+-{:-<17}", "", "", "");
    for row in &table.rows {
        let acc = format!("{:.4} ± {:.4}", row.mean_acc, row.std_acc);
        let f1 = format!("{:.4} ± {:.4}", row.mean_f1, row.std_f1);
        let marker = if row.best { " *" } else { "" };
        let line = format!(
            "{:<10} | {:<17} | {:<17}{}",
            row.optimizer.to_string(),
            acc,
            f1,
            marker
        );
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let _ = writeln!(
        out,
        "(mean ± std over {} seed{}; * best mean accuracy)",
        table.seeds.len(),
        if table.seeds.len() == 1 { "" } else { "s" }
    );
    Ok(out)
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the report files for a comparison into `out_dir` and returns
/// the written paths.
///
/// `Csv` writes `comparison.csv` and `trajectories.csv`; `TextTable`
/// writes `comparison.txt` and `trajectories.csv`. Nothing is created
/// when the record set is empty.
pub fn emit_report(
    table: &ComparisonTable,
    records: &[RunRecord],
    format: ReportFormat,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    if records.is_empty() || table.rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let summary = render_summary_csv(records)?;
    let trajectories = render_trajectories_csv(records)?;
    let text = render_text_table(table)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    match format {
        ReportFormat::Csv => {
            written.push(write_file(out_dir, "comparison.csv", &summary)?);
        }
        ReportFormat::TextTable => {
            written.push(write_file(out_dir, "comparison.txt", &text)?);
        }
    }
    written.push(write_file(out_dir, "trajectories.csv", &trajectories)?);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::EvalPoint;

    fn record(kind: OptimizerKind, seed: u64, acc: Option<f64>) -> RunRecord {
        RunRecord {
            fingerprint: "deadbeefdeadbeef".into(),
            optimizer: kind,
            seed,
            eval_points: vec![EvalPoint {
                step: 3,
                train_loss: 0.125,
                val_loss: 0.25,
                val_accuracy: acc,
                val_f1: acc.map(|a| a - 0.01),
                effective_lr: 0.30000000000000004,
                clip_event_count: 1,
            }],
            final_train_loss: 0.125,
            final_val_loss: 0.25,
            final_accuracy: acc,
            final_f1: acc.map(|a| a - 0.01),
            total_steps: 3,
            clip_events: 1,
            wall_secs: 1.5,
        }
    }

    #[test]
    fn summary_round_trip_is_exact() {
        let records = vec![
            record(OptimizerKind::Sgd, 42, Some(0.7512345678901234)),
            record(OptimizerKind::Composite, 43, Some(0.96)),
            record(OptimizerKind::Adam, 44, None),
        ];
        let csv = render_summary_csv(&records).unwrap();
        let rows = parse_summary_csv(&csv).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, rec) in rows.iter().zip(&records) {
            assert_eq!(row.optimizer, rec.optimizer);
            assert_eq!(row.seed, rec.seed);
            assert_eq!(row.acc, rec.final_accuracy);
            assert_eq!(row.f1, rec.final_f1);
            assert_eq!(row.final_loss, rec.final_train_loss);
            assert_eq!(row.steps, rec.total_steps);
            assert_eq!(row.clip_events, rec.clip_events);
        }
    }

    #[test]
    fn trajectories_schema() {
        let csv = render_trajectories_csv(&[record(OptimizerKind::Adam, 42, Some(0.9))]).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "adam,42,3,0.125,0.25,0.30000000000000004"
        );
    }

    #[test]
    fn empty_records_error_and_create_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("results");
        let table = ComparisonTable {
            rows: vec![],
            seeds: vec![],
        };
        assert!(matches!(
            emit_report(&table, &[], ReportFormat::Csv, &out),
            Err(Error::EmptyReport)
        ));
        assert!(!out.exists());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("not-a-dir");
        std::fs::write(&blocker, "plain file").unwrap();
        let records = vec![record(OptimizerKind::Sgd, 42, Some(0.75))];
        let table = ComparisonTable {
            rows: vec![crate::harness::ComparisonRow {
                optimizer: OptimizerKind::Sgd,
                mean_acc: 0.75,
                std_acc: 0.0,
                mean_f1: 0.74,
                std_f1: 0.0,
                best: true,
            }],
            seeds: vec![42],
        };
        let err = emit_report(&table, &records, ReportFormat::Csv, &blocker).unwrap_err();
        assert!(matches!(err, Error::Io { .. }), "{err}");
    }

    #[test]
    fn text_table_rows_in_canonical_order() {
        use crate::harness::ComparisonRow;
        let rows = OptimizerKind::ALL
            .iter()
            .map(|&k| ComparisonRow {
                optimizer: k,
                mean_acc: 0.5 + 0.05 * k.order() as f64,
                std_acc: 0.01,
                mean_f1: 0.5 + 0.05 * k.order() as f64,
                std_f1: 0.01,
                best: k == OptimizerKind::Composite,
            })
            .collect();
        let table = ComparisonTable {
            rows,
            seeds: vec![42, 43],
        };
        let text = render_text_table(&table).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let expected = ["SGD", "Momentum", "AdaGrad", "RMSProp", "Adam", "Composite"];
        for (line, name) in lines[2..8].iter().zip(expected) {
            assert!(line.starts_with(name), "line {line:?} vs {name}");
        }
        assert!(lines[7].trim_end().ends_with('*'));
    }

    #[test]
    fn format_parses() {
        assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
        assert_eq!(
            "table".parse::<ReportFormat>().unwrap(),
            ReportFormat::TextTable
        );
        assert!("yaml".parse::<ReportFormat>().is_err());
    }

    #[test]
    fn emit_writes_requested_files() {
        let dir = tempfile::tempdir().unwrap();
        let records = vec![record(OptimizerKind::Sgd, 42, Some(0.75))];
        let table = ComparisonTable {
            rows: vec![crate::harness::ComparisonRow {
                optimizer: OptimizerKind::Sgd,
                mean_acc: 0.75,
                std_acc: 0.0,
                mean_f1: 0.74,
                std_f1: 0.0,
                best: true,
            }],
            seeds: vec![42],
        };
        let paths = emit_report(&table, &records, ReportFormat::Csv, dir.path()).unwrap();
        assert!(paths.iter().any(|p| p.ends_with("comparison.csv")));
        assert!(paths.iter().any(|p| p.ends_with("trajectories.csv")));
        let paths = emit_report(&table, &records, ReportFormat::TextTable, dir.path()).unwrap();
        assert!(paths.iter().any(|p| p.ends_with("comparison.txt")));
    }
}

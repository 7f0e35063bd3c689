//! Deterministic synthetic two-class classification data.
//!
//! The generator draws two class-conditional feature profiles and gives
//! every feature its own magnitude scale, log-uniform over three orders
//! of magnitude. Per-feature signal-to-noise is scale-independent, so
//! the small-scale features carry as much class information as the large
//! ones; a fixed-learning-rate optimizer can only afford steps sized for
//! the large-scale coordinates and leaves the rest unlearned. Feature
//! magnitudes are normalized globally (one scalar for the whole matrix),
//! which keeps activations in a trainable range without touching the
//! relative spread.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::param_store::Rng;

/// Ratio between the largest and smallest per-feature scale.
const SCALE_SPREAD_DECADES: f64 = 3.0;
const TRAIN_FRACTION: f64 = 0.8;

/// A single mini-batch: row-major features plus binary labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    features: Vec<f64>,
    labels: Vec<u8>,
    dim: usize,
}

impl Batch {
    pub fn new(features: Vec<f64>, labels: Vec<u8>, dim: usize) -> Result<Self> {
        if labels.is_empty() || features.len() != labels.len() * dim {
            return Err(Error::InvalidConfig(format!(
                "batch of {} labels needs {} features, got {}",
                labels.len(),
                labels.len() * dim,
                features.len()
            )));
        }
        Ok(Self {
            features,
            labels,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }
}

/// A generated dataset with a fixed 80/20 train/validation split.
///
/// Rows `0..n_train` are the training split, the rest validation.
/// Regeneration from the same seed is bitwise identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    features: Vec<f64>, // n x d, row-major
    labels: Vec<u8>,
    dim: usize,
    n_train: usize,
    seed: Option<u64>,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_val(&self) -> usize {
        self.len() - self.n_train
    }

    /// Generator seed; `None` for datasets imported from CSV.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// Materializes the given training rows as a batch.
    pub fn batch_of(&self, rows: &[usize]) -> Result<Batch> {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.feature_row(r));
            labels.push(self.labels[r]);
        }
        Batch::new(features, labels, self.dim)
    }

    /// The whole training split as one batch.
    pub fn train_batch(&self) -> Result<Batch> {
        self.batch_of(&(0..self.n_train).collect::<Vec<_>>())
    }

    /// The whole validation split as one batch.
    pub fn val_batch(&self) -> Result<Batch> {
        self.batch_of(&(self.n_train..self.len()).collect::<Vec<_>>())
    }

    /// Writes the dataset as CSV: header row, one feature column per
    /// dimension, label column last. Floats use the shortest
    /// round-trippable representation.
    pub fn to_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for j in 0..self.dim {
            let _ = write!(out, "f{j},");
        }
        out.push_str("label\n");
        for i in 0..self.len() {
            for x in self.feature_row(i) {
                let _ = write!(out, "{x},");
            }
            let _ = writeln!(out, "{}", self.labels[i]);
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads a dataset written by [`SyntheticDataset::to_csv`]. The
    /// 80/20 split convention is re-applied to the stored row order.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            what: path.display().to_string(),
            detail: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.last() != Some(&"label") || cols.len() < 2 {
            return Err(Error::Parse {
                what: path.display().to_string(),
                detail: format!("unexpected header {header:?}"),
            });
        }
        let dim = cols.len() - 1;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse {
                    what: path.display().to_string(),
                    detail: format!("line {}: expected {} fields", lineno + 2, dim + 1),
                });
            }
            for f in &fields[..dim] {
                features.push(f.parse::<f64>().map_err(|e| Error::Parse {
                    what: path.display().to_string(),
                    detail: format!("line {}: {e}", lineno + 2),
                })?);
            }
            labels.push(match fields[dim] {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Parse {
                        what: path.display().to_string(),
                        detail: format!("line {}: bad label {other:?}", lineno + 2),
                    })
                }
            });
        }
        let n = labels.len();
        Ok(Self {
            features,
            labels,
            dim,
            n_train: (n as f64 * TRAIN_FRACTION) as usize,
            seed: None,
        })
    }
}

/// Generates a balanced two-class dataset with heavy-tailed per-feature
/// scales. Deterministic in `seed`; labeled child streams keep scales,
/// profiles, noise, and row order independent of each other.
pub fn make_dataset(seed: u64, n: usize, d: usize, noise: f64) -> Result<SyntheticDataset> {
    if n < 100 {
        return Err(Error::InvalidConfig(format!(
            "dataset needs n >= 100, got {n}"
        )));
    }
    if d < 2 {
        return Err(Error::InvalidConfig(format!(
            "dataset needs d >= 2, got {d}"
        )));
    }
    if !(noise >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise must be >= 0, got {noise}"
        )));
    }
    let root = Rng::new(seed);

    let mut scale_rng = root.derive("feature-scales");
    let scales: Vec<f64> = (0..d)
        .map(|_| 10f64.powf(SCALE_SPREAD_DECADES * scale_rng.next_f64()))
        .collect();

    // two class-conditional profiles, half-normal like word rates
    let mut profile_rng = root.derive("class-profiles");
    let profiles: [Vec<f64>; 2] = [
        (0..d).map(|_| profile_rng.next_gaussian().abs()).collect(),
        (0..d).map(|_| profile_rng.next_gaussian().abs()).collect(),
    ];

    // exactly balanced labels in shuffled row order
    let mut labels: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    root.derive("row-order").shuffle(&mut labels);

    let mut noise_rng = root.derive("feature-noise");
    let mut features = Vec::with_capacity(n * d);
    for &label in &labels {
        let profile = &profiles[label as usize];
        for j in 0..d {
            let z = noise_rng.next_gaussian();
            features.push(scales[j] * (profile[j] + noise * z));
        }
    }

    // one global magnitude normalization; relative scales are untouched
    let mean_sq = features.iter().map(|x| x * x).sum::<f64>() / features.len() as f64;
    if mean_sq > 0.0 {
        let inv_rms = 1.0 / mean_sq.sqrt();
        for x in &mut features {
            *x *= inv_rms;
        }
    }

    Ok(SyntheticDataset {
        features,
        labels,
        dim: d,
        n_train: (n as f64 * TRAIN_FRACTION) as usize,
        seed: Some(seed),
    })
}

/// Number of optimizer steps one epoch contributes.
pub fn batches_per_epoch(n_train: usize, batch_size: usize) -> usize {
    n_train.div_ceil(batch_size)
}

/// Iterator over one epoch of training mini-batches.
///
/// The row order is a seeded shuffle drawn at construction; every
/// training row appears exactly once per epoch and only the last batch
/// may be short.
pub struct MinibatchIter<'a> {
    dataset: &'a SyntheticDataset,
    order: Vec<usize>,
    batch_size: usize,
    pos: usize,
}

impl<'a> Iterator for MinibatchIter<'a> {
    type Item = Batch;

    fn next(&mut self) -> Option<Batch> {
        if self.pos >= self.order.len() {
            return None;
        }
        let end = (self.pos + self.batch_size).min(self.order.len());
        let rows = &self.order[self.pos..end];
        self.pos = end;
        Some(
            self.dataset
                .batch_of(rows)
                .expect("rows come from the train split"),
        )
    }
}

/// Builds one epoch's worth of shuffled mini-batches over the training
/// split. Errors on `batch_size == 0`.
pub fn minibatch_iter<'a>(
    dataset: &'a SyntheticDataset,
    batch_size: usize,
    rng: &mut Rng,
) -> Result<MinibatchIter<'a>> {
    if batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be >= 1".into()));
    }
    let mut order: Vec<usize> = (0..dataset.n_train()).collect();
    rng.shuffle(&mut order);
    Ok(MinibatchIter {
        dataset,
        order,
        batch_size,
        pos: 0,
    })
}

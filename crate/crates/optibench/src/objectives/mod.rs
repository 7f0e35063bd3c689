//! Differentiable problems for the harness: analytic test functions and
//! a synthetic classification task driven by a small MLP.

mod dataset;
pub mod gradcheck;
mod mlp;

pub use dataset::{
    batches_per_epoch, make_dataset, minibatch_iter, Batch, MinibatchIter, SyntheticDataset,
};
pub use mlp::{hidden_activations, mlp_eval, mlp_predict, MlpModel, MlpObjective, Mode};

use crate::error::{Error, Result};
use crate::param_store::{ParamVector, Rng};

/// A differentiable problem: parameters to `(loss, gradient)`.
///
/// `eval` must be pure given an explicit `rng` value, so cloning the rng
/// replays any internal stochasticity (dropout masks) bit for bit.
pub trait Objective {
    fn name(&self) -> &str;
    fn param_count(&self) -> usize;
    fn eval(
        &self,
        theta: &ParamVector,
        batch: Option<&Batch>,
        rng: &mut Rng,
    ) -> Result<(f64, ParamVector)>;
    /// Starting point for a training run.
    fn initial_params(&self, rng: &mut Rng) -> ParamVector;
}

/// Diagonal quadratic bowl: `loss = 1/2 * sum(d_i * theta_i^2)`.
///
/// The spread of the diagonal is the condition number, which makes this
/// the standard testbed for fixed-versus-adaptive learning rates.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    diag: ParamVector,
    name: String,
}

impl QuadraticObjective {
    pub fn new(diag: ParamVector) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(bad) = diag.data().iter().find(|&&d| !(d > 0.0)) {
            return Err(Error::InvalidObjective(format!(
                "quadratic diagonal must be positive, got {bad}"
            )));
        }
        let name = format!("quadratic-{}d", diag.len());
        Ok(Self { diag, name })
    }

    /// Log-spaced diagonal from 1 to `condition_number`.
    pub fn with_condition_number(dim: usize, condition_number: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        if !(condition_number >= 1.0) {
            return Err(Error::InvalidObjective(format!(
                "condition number must be >= 1, got {condition_number}"
            )));
        }
        let diag: Vec<f64> = (0..dim)
            .map(|i| {
                if dim == 1 {
                    1.0
                } else {
                    condition_number.powf(i as f64 / (dim - 1) as f64)
                }
            })
            .collect();
        Self::new(ParamVector::flat(diag))
    }

    pub fn diag(&self) -> &ParamVector {
        &self.diag
    }
}

impl Objective for QuadraticObjective {
    fn name(&self) -> &str {
        &self.name
    }

    fn param_count(&self) -> usize {
        self.diag.len()
    }

    fn eval(
        &self,
        theta: &ParamVector,
        _batch: Option<&Batch>,
        _rng: &mut Rng,
    ) -> Result<(f64, ParamVector)> {
        if !theta.same_shape(&self.diag) {
            return Err(Error::ShapeMismatch {
                left: self.diag.shape().to_vec(),
                right: theta.shape().to_vec(),
            });
        }
        let mut loss = 0.0;
        let grad: Vec<f64> = self
            .diag
            .data()
            .iter()
            .zip(theta.data())
            .map(|(d, t)| {
                loss += 0.5 * d * t * t;
                d * t
            })
            .collect();
        Ok((loss, ParamVector::flat(grad)))
    }

    fn initial_params(&self, _rng: &mut Rng) -> ParamVector {
        ParamVector::flat(vec![1.0; self.diag.len()])
    }
}

/// The two-dimensional Rosenbrock valley:
/// `loss = (1 - x)^2 + 100 (y - x^2)^2`, minimum 0 at `(1, 1)`.
#[derive(Debug, Clone, Default)]
pub struct RosenbrockObjective;

impl RosenbrockObjective {
    pub fn new() -> Self {
        Self
    }
}

impl Objective for RosenbrockObjective {
    fn name(&self) -> &str {
        "rosenbrock"
    }

    fn param_count(&self) -> usize {
        2
    }

    fn eval(
        &self,
        theta: &ParamVector,
        _batch: Option<&Batch>,
        _rng: &mut Rng,
    ) -> Result<(f64, ParamVector)> {
        if theta.len() != 2 {
            return Err(Error::ShapeMismatch {
                left: vec![2],
                right: theta.shape().to_vec(),
            });
        }
        let (x, y) = (theta.data()[0], theta.data()[1]);
        let loss = (1.0 - x).powi(2) + 100.0 * (y - x * x).powi(2);
        let gx = -2.0 * (1.0 - x) - 400.0 * x * (y - x * x);
        let gy = 200.0 * (y - x * x);
        Ok((loss, ParamVector::flat(vec![gx, gy])))
    }

    fn initial_params(&self, _rng: &mut Rng) -> ParamVector {
        // classic start in the far valley arm
        ParamVector::flat(vec![-1.2, 1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_at(obj: &dyn Objective, point: &[f64]) -> (f64, Vec<f64>) {
        let mut rng = Rng::new(0);
        let (loss, grad) = obj
            .eval(&ParamVector::flat(point.to_vec()), None, &mut rng)
            .unwrap();
        (loss, grad.data().to_vec())
    }

    #[test]
    fn quadratic_examples() {
        let identity = QuadraticObjective::new(ParamVector::flat(vec![1.0, 1.0])).unwrap();
        let (loss, grad) = eval_at(&identity, &[1.0, 1.0]);
        assert_eq!(loss, 1.0);
        assert_eq!(grad, vec![1.0, 1.0]);

        let skewed = QuadraticObjective::new(ParamVector::flat(vec![1.0, 100.0])).unwrap();
        let (loss, grad) = eval_at(&skewed, &[1.0, 1.0]);
        assert_eq!(loss, 50.5);
        assert_eq!(grad, vec![1.0, 100.0]);

        let (loss, grad) = eval_at(&skewed, &[0.0, 0.0]);
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0, 0.0]);
    }

    #[test]
    fn quadratic_rejects_nonpositive_diagonal() {
        assert!(QuadraticObjective::new(ParamVector::flat(vec![1.0, 0.0])).is_err());
        assert!(QuadraticObjective::new(ParamVector::flat(vec![-1.0])).is_err());
        assert!(QuadraticObjective::new(ParamVector::flat(vec![])).is_err());
    }

    #[test]
    fn condition_number_diagonal_is_log_spaced() {
        let q = QuadraticObjective::with_condition_number(4, 1000.0).unwrap();
        let d = q.diag().data();
        assert_eq!(d[0], 1.0);
        assert!((d[3] - 1000.0).abs() < 1e-9);
        assert!((d[1] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn rosenbrock_known_points() {
        let r = RosenbrockObjective::new();
        let (loss, grad) = eval_at(&r, &[1.0, 1.0]);
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![0.0, 0.0]);

        let (loss, grad) = eval_at(&r, &[0.0, 0.0]);
        assert_eq!(loss, 1.0);
        assert_eq!(grad, vec![-2.0, 0.0]);

        let (loss, grad) = eval_at(&r, &[-1.0, 1.0]);
        assert_eq!(loss, 4.0);
        assert_eq!(grad, vec![-4.0, 0.0]);
    }

    #[test]
    fn losses_are_nonnegative_at_random_points() {
        let q = QuadraticObjective::with_condition_number(6, 100.0).unwrap();
        let r = RosenbrockObjective::new();
        let mut rng = Rng::new(123);
        for _ in 0..50 {
            let p6: Vec<f64> = (0..6).map(|_| 4.0 * rng.next_f64() - 2.0).collect();
            assert!(eval_at(&q, &p6).0 >= 0.0);
            let p2: Vec<f64> = (0..2).map(|_| 4.0 * rng.next_f64() - 2.0).collect();
            assert!(eval_at(&r, &p2).0 >= 0.0);
        }
    }
}

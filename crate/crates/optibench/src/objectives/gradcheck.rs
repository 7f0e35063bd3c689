//! Finite-difference gradient auditing.
//!
//! Central differences with per-coordinate step `1e-6 * max(1, |x_i|)`
//! give an estimate that is independent of the analytic backward path,
//! which makes this the standard cross-check for hand-written gradients.

use crate::error::Result;
use crate::objectives::{Batch, Objective};
use crate::param_store::{ParamVector, Rng};

/// Floor in the relative-error denominator; keeps finite-difference
/// roundoff noise on near-zero coordinates from dominating the check.
const REL_ERR_FLOOR: f64 = 1e-2;

/// Relative disagreement between two gradient estimates.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(REL_ERR_FLOOR)
}

/// Central-difference gradient of `f` at `theta`.
pub fn central_diff_gradient<F>(mut f: F, theta: &ParamVector) -> Result<ParamVector>
where
    F: FnMut(&ParamVector) -> Result<f64>,
{
    let mut grad = vec![0.0; theta.len()];
    for (i, g) in grad.iter_mut().enumerate() {
        let h = 1e-6 * theta.data()[i].abs().max(1.0);
        let mut plus = theta.clone();
        plus.data_mut()[i] += h;
        let mut minus = theta.clone();
        minus.data_mut()[i] -= h;
        *g = (f(&plus)? - f(&minus)?) / (2.0 * h);
    }
    Ok(ParamVector::flat(grad))
}

/// Worst per-coordinate disagreement at one point.
#[derive(Debug, Clone, Copy)]
pub struct PointCheck {
    pub max_rel_err: f64,
    pub worst_coord: usize,
}

/// Compares an objective's analytic gradient against central finite
/// differences at `theta`. Each probe replays the same `rng` state, so
/// stochastic objectives see identical dropout masks on every eval.
pub fn check_point(
    objective: &dyn Objective,
    theta: &ParamVector,
    batch: Option<&Batch>,
    rng: &Rng,
) -> Result<PointCheck> {
    let (_, analytic) = objective.eval(theta, batch, &mut rng.clone())?;
    let numeric = central_diff_gradient(
        |t| objective.eval(t, batch, &mut rng.clone()).map(|(l, _)| l),
        theta,
    )?;
    let mut worst = PointCheck {
        max_rel_err: 0.0,
        worst_coord: 0,
    };
    for (i, (a, n)) in analytic.data().iter().zip(numeric.data()).enumerate() {
        let rel = relative_error(*a, *n);
        if rel > worst.max_rel_err {
            worst = PointCheck {
                max_rel_err: rel,
                worst_coord: i,
            };
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{QuadraticObjective, RosenbrockObjective};

    #[test]
    fn rosenbrock_gradient_matches_finite_differences() {
        let r = RosenbrockObjective::new();
        let rng = Rng::new(0);
        let mut point_rng = Rng::new(17);
        for _ in 0..20 {
            let p = ParamVector::flat(vec![
                4.0 * point_rng.next_f64() - 2.0,
                4.0 * point_rng.next_f64() - 2.0,
            ]);
            let check = check_point(&r, &p, None, &rng).unwrap();
            assert!(
                check.max_rel_err < 1e-6,
                "point {:?}: rel err {}",
                p.data(),
                check.max_rel_err
            );
        }
    }

    #[test]
    fn quadratic_gradient_matches_finite_differences() {
        let q = QuadraticObjective::with_condition_number(5, 1000.0).unwrap();
        let rng = Rng::new(0);
        let mut point_rng = Rng::new(29);
        for _ in 0..20 {
            let p = ParamVector::flat((0..5).map(|_| 2.0 * point_rng.next_f64() - 1.0).collect());
            let check = check_point(&q, &p, None, &rng).unwrap();
            assert!(check.max_rel_err < 1e-6, "rel err {}", check.max_rel_err);
        }
    }

    #[test]
    fn central_diff_on_known_function() {
        // f(x) = x0^2 + 3 x1 has gradient (2 x0, 3)
        let f = |t: &ParamVector| Ok(t.data()[0] * t.data()[0] + 3.0 * t.data()[1]);
        let g = central_diff_gradient(f, &ParamVector::flat(vec![2.0, 5.0])).unwrap();
        assert!((g.data()[0] - 4.0).abs() < 1e-8);
        assert!((g.data()[1] - 3.0).abs() < 1e-8);
    }
}

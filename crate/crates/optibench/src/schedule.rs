//! Learning-rate schedules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether `t` in the decay formula counts epochs or optimizer steps.
///
/// Per-step decay at typical rates kills the learning rate within a few
/// hundred steps, so `PerEpoch` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleUnit {
    #[default]
    PerEpoch,
    PerStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    ExponentialDecay,
}

/// A learning-rate schedule: constant, or `eta0 * gamma^t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub eta0: f64,
    pub gamma: f64,
    pub unit: ScheduleUnit,
}

impl Schedule {
    pub fn constant(eta0: f64) -> Result<Self> {
        Self::validated(ScheduleKind::Constant, eta0, 1.0, ScheduleUnit::PerEpoch)
    }

    pub fn exponential(eta0: f64, gamma: f64, unit: ScheduleUnit) -> Result<Self> {
        Self::validated(ScheduleKind::ExponentialDecay, eta0, gamma, unit)
    }

    fn validated(kind: ScheduleKind, eta0: f64, gamma: f64, unit: ScheduleUnit) -> Result<Self> {
        if !(eta0 > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "eta0 must be > 0, got {eta0}"
            )));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidHyperParams(format!(
                "gamma must be in (0, 1], got {gamma}"
            )));
        }
        Ok(Self {
            kind,
            eta0,
            gamma,
            unit,
        })
    }

    /// Learning rate after `t` schedule ticks.
    pub fn lr_at(&self, t: u32) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eta0,
            ScheduleKind::ExponentialDecay => decayed_lr(self.eta0, self.gamma, t),
        }
    }
}

/// Exponentially decayed learning rate `eta0 * gamma^t`.
///
/// `t = 0` returns `eta0` exactly; for `gamma <= 1` the result never
/// increases with `t`.
pub fn decayed_lr(eta0: f64, gamma: f64, t: u32) -> f64 {
    eta0 * gamma.powi(t as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn t_zero_returns_eta0_exactly() {
        assert_eq!(decayed_lr(2e-5, 0.95, 0), 2e-5);
        assert_eq!(decayed_lr(2e-5, 0.5, 0).to_bits(), 2e-5f64.to_bits());
    }

    #[test]
    fn three_step_decay_hand_value() {
        // 2e-5 * 0.95^3 = 2e-5 * 0.857375 = 1.714750e-5
        let lr = decayed_lr(2e-5, 0.95, 3);
        let rel = (lr - 1.71475e-5).abs() / 1.71475e-5;
        assert!(rel < 1e-12, "lr {lr}, rel {rel}");
    }

    #[test]
    fn gamma_one_is_constant() {
        for t in [0u32, 1, 17, 10_000] {
            assert_eq!(decayed_lr(3.5e-3, 1.0, t), 3.5e-3);
        }
    }

    #[test]
    fn running_product_consistency() {
        for &gamma in &[0.9f64, 0.95, 0.97, 0.99, 1.0] {
            let eta0 = 2e-5;
            let mut product = eta0;
            for t in 0..=10_000u32 {
                let lr = decayed_lr(eta0, gamma, t);
                if product > 1e-300 {
                    let rel = (lr - product).abs() / product;
                    assert!(rel < 1e-10, "gamma {gamma} t {t}: rel {rel}");
                }
                product *= gamma;
            }
        }
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::exponential(0.0, 0.9, ScheduleUnit::PerEpoch).is_err());
        assert!(Schedule::exponential(0.1, 0.0, ScheduleUnit::PerEpoch).is_err());
        assert!(Schedule::exponential(0.1, 1.5, ScheduleUnit::PerEpoch).is_err());
        let s = Schedule::exponential(0.1, 0.97, ScheduleUnit::PerStep).unwrap();
        assert_eq!(s.lr_at(0), 0.1);
        let c = Schedule::constant(0.1).unwrap();
        assert_eq!(c.lr_at(500), 0.1);
    }

    proptest! {
        #[test]
        fn monotone_nonincreasing(
            eta0 in 1e-6f64..1.0,
            gamma in 0.9f64..=1.0,
            t in 0u32..10_000,
        ) {
            prop_assert!(decayed_lr(eta0, gamma, t + 1) <= decayed_lr(eta0, gamma, t));
        }
    }
}

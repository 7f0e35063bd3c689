//! The six parameter-update rules as pure state transitions.
//!
//! Every step function maps `(state, theta, gradient, hyperparams)` to a
//! new state and new parameters, plus a small [`StepReport`] for
//! telemetry. Repeated invocation on identical inputs is bitwise
//! identical; nothing here draws randomness or touches globals.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::clip::{clip_gradient, ClipConfig};
use crate::error::{Error, Result};
use crate::param_store::ParamVector;
use crate::schedule::decayed_lr;

/// Running beta powers below this are treated as fully decayed.
const POW_UNDERFLOW: f64 = 1e-300;

/// Which update rule a state drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    AdaGrad,
    RmsProp,
    Adam,
    Composite,
}

impl OptimizerKind {
    /// All kinds in the canonical reporting order.
    pub const ALL: [OptimizerKind; 6] = [
        OptimizerKind::Sgd,
        OptimizerKind::Momentum,
        OptimizerKind::AdaGrad,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
        OptimizerKind::Composite,
    ];

    /// Position in the canonical reporting order.
    pub fn order(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap()
    }

    /// Lowercase identifier used in configs and CSV output.
    pub fn id(self) -> &'static str {
        match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::AdaGrad => "adagrad",
            OptimizerKind::RmsProp => "rmsprop",
            OptimizerKind::Adam => "adam",
            OptimizerKind::Composite => "composite",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OptimizerKind::Sgd => "SGD",
            OptimizerKind::Momentum => "Momentum",
            OptimizerKind::AdaGrad => "AdaGrad",
            OptimizerKind::RmsProp => "RMSProp",
            OptimizerKind::Adam => "Adam",
            OptimizerKind::Composite => "Composite",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OptimizerKind::ALL
            .into_iter()
            .find(|k| k.id() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown optimizer {s:?}")))
    }
}

/// Every tunable knob in one validated record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperParams {
    /// Initial learning rate.
    pub eta0: f64,
    /// First-moment decay for Adam.
    pub beta1: f64,
    /// Second-moment decay for Adam.
    pub beta2: f64,
    /// Divide-by-zero guard added outside the square root.
    pub epsilon: f64,
    /// Momentum coefficient.
    pub mu: f64,
    /// RMSProp moving-average decay.
    pub rho: f64,
    /// Learning-rate decay rate for the composite scheme.
    pub gamma: f64,
    /// L2 clip threshold for the composite scheme; `null` disables.
    pub clip_value: Option<f64>,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            eta0: 2e-5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            mu: 0.9,
            rho: 0.9,
            gamma: 0.97,
            clip_value: Some(1.0),
        }
    }
}

impl HyperParams {
    pub fn with_eta0(eta0: f64) -> Self {
        Self {
            eta0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn fail(msg: String) -> Result<()> {
            Err(Error::InvalidHyperParams(msg))
        }
        if !(self.eta0 > 0.0) {
            return fail(format!("eta0 must be > 0, got {}", self.eta0));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            return fail(format!("beta1 must be in [0, 1), got {}", self.beta1));
        }
        if !(0.0..1.0).contains(&self.beta2) {
            return fail(format!("beta2 must be in [0, 1), got {}", self.beta2));
        }
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be > 0, got {}", self.epsilon));
        }
        if !(0.0..1.0).contains(&self.mu) {
            return fail(format!("mu must be in [0, 1), got {}", self.mu));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return fail(format!("rho must be in (0, 1), got {}", self.rho));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return fail(format!("gamma must be in (0, 1], got {}", self.gamma));
        }
        if let Some(c) = self.clip_value {
            if !(c > 0.0) {
                return fail(format!("clip_value must be > 0 when enabled, got {c}"));
            }
        }
        Ok(())
    }

    fn clip_config(&self) -> ClipConfig {
        ClipConfig {
            clip_value: self.clip_value,
        }
    }
}

/// Mutable per-run optimizer state: step counter plus whatever moment or
/// accumulator buffers the kind needs.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    kind: OptimizerKind,
    t: u64,
    m: Option<ParamVector>,
    v: Option<ParamVector>,
    beta1_pow: f64,
    beta2_pow: f64,
}

impl OptimizerState {
    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Number of completed steps.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// First moment, when the kind keeps one.
    pub fn first_moment(&self) -> Option<&ParamVector> {
        self.m.as_ref()
    }

    /// Second moment / squared-gradient accumulator / velocity, per kind.
    pub fn second_moment(&self) -> Option<&ParamVector> {
        self.v.as_ref()
    }

    fn expect_kind(&self, expected: OptimizerKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "state is for {} but {} step was requested",
                self.kind, expected
            )))
        }
    }
}

/// Fresh state for `kind` over parameters of the given shape: `t = 0`,
/// moment buffers zero-initialized where the kind requires them.
pub fn init_state(kind: OptimizerKind, shape: &[usize]) -> OptimizerState {
    let zeros = || Some(ParamVector::zeros(shape));
    let (m, v) = match kind {
        OptimizerKind::Sgd => (None, None),
        OptimizerKind::Momentum => (None, zeros()),
        OptimizerKind::AdaGrad => (None, zeros()),
        OptimizerKind::RmsProp => (None, zeros()),
        OptimizerKind::Adam | OptimizerKind::Composite => (zeros(), zeros()),
    };
    OptimizerState {
        kind,
        t: 0,
        m,
        v,
        beta1_pow: 1.0,
        beta2_pow: 1.0,
    }
}

/// Telemetry for a single optimizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Learning rate actually applied this step.
    pub effective_lr: f64,
    /// Gradient L2 norm before any clipping.
    pub pre_clip_grad_norm: f64,
    /// Whether clipping rescaled the gradient.
    pub clipped: bool,
    /// L2 norm of `theta' - theta`.
    pub update_norm: f64,
}

fn check_shapes(theta: &ParamVector, grad: &ParamVector) -> Result<()> {
    if theta.same_shape(grad) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            left: theta.shape().to_vec(),
            right: grad.shape().to_vec(),
        })
    }
}

/// Fixed-learning-rate gradient descent: `theta' = theta - eta0 * g`.
pub fn sgd_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::Sgd)?;
    check_shapes(theta, grad)?;
    let eta = hp.eta0;
    let mut update_sq = 0.0;
    for (t, g) in theta.data_mut().iter_mut().zip(grad.data()) {
        let delta = eta * g;
        *t -= delta;
        update_sq += delta * delta;
    }
    state.t += 1;
    Ok(StepReport {
        effective_lr: eta,
        pre_clip_grad_norm: grad.l2_norm()?,
        clipped: false,
        update_norm: update_sq.sqrt(),
    })
}

/// Heavy-ball momentum: `v' = mu * v + g`, `theta' = theta - eta0 * v'`.
pub fn momentum_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::Momentum)?;
    check_shapes(theta, grad)?;
    let v = state.v.as_mut().expect("momentum state carries velocity");
    let eta = hp.eta0;
    let mut update_sq = 0.0;
    for ((t, g), vi) in theta
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(v.data_mut())
    {
        *vi = hp.mu * *vi + g;
        let delta = eta * *vi;
        *t -= delta;
        update_sq += delta * delta;
    }
    state.t += 1;
    Ok(StepReport {
        effective_lr: eta,
        pre_clip_grad_norm: grad.l2_norm()?,
        clipped: false,
        update_norm: update_sq.sqrt(),
    })
}

/// AdaGrad: `v' = v + g^2`, `theta' = theta - eta0 * g / (sqrt(v') + eps)`.
pub fn adagrad_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::AdaGrad)?;
    check_shapes(theta, grad)?;
    let v = state.v.as_mut().expect("adagrad state carries accumulator");
    let eta = hp.eta0;
    let mut update_sq = 0.0;
    for ((t, g), vi) in theta
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(v.data_mut())
    {
        *vi += g * g;
        let delta = eta * g / (vi.sqrt() + hp.epsilon);
        *t -= delta;
        update_sq += delta * delta;
    }
    state.t += 1;
    Ok(StepReport {
        effective_lr: eta,
        pre_clip_grad_norm: grad.l2_norm()?,
        clipped: false,
        update_norm: update_sq.sqrt(),
    })
}

/// RMSProp: `v' = rho * v + (1 - rho) * g^2`,
/// `theta' = theta - eta0 * g / (sqrt(v') + eps)`.
pub fn rmsprop_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::RmsProp)?;
    check_shapes(theta, grad)?;
    let v = state.v.as_mut().expect("rmsprop state carries average");
    let eta = hp.eta0;
    let mut update_sq = 0.0;
    for ((t, g), vi) in theta
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(v.data_mut())
    {
        *vi = hp.rho * *vi + (1.0 - hp.rho) * (g * g);
        let delta = eta * g / (vi.sqrt() + hp.epsilon);
        *t -= delta;
        update_sq += delta * delta;
    }
    state.t += 1;
    Ok(StepReport {
        effective_lr: eta,
        pre_clip_grad_norm: grad.l2_norm()?,
        clipped: false,
        update_norm: update_sq.sqrt(),
    })
}

/// The Adam recurrence shared by [`adam_step`] and [`composite_step`].
///
/// State stores the uncorrected moments; bias-corrected values are
/// rebuilt on the fly from running beta powers (no `pow` drift, clamped
/// to zero once fully decayed).
fn adam_update(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
    eta: f64,
) -> f64 {
    state.t += 1;
    state.beta1_pow *= hp.beta1;
    if state.beta1_pow < POW_UNDERFLOW {
        state.beta1_pow = 0.0;
    }
    state.beta2_pow *= hp.beta2;
    if state.beta2_pow < POW_UNDERFLOW {
        state.beta2_pow = 0.0;
    }
    let bc1 = 1.0 - state.beta1_pow;
    let bc2 = 1.0 - state.beta2_pow;

    let m = state.m.as_mut().expect("adam state carries first moment");
    let v = state.v.as_mut().expect("adam state carries second moment");
    let mut update_sq = 0.0;
    for (((t, g), mi), vi) in theta
        .data_mut()
        .iter_mut()
        .zip(grad.data())
        .zip(m.data_mut())
        .zip(v.data_mut())
    {
        *mi = hp.beta1 * *mi + (1.0 - hp.beta1) * g;
        *vi = hp.beta2 * *vi + (1.0 - hp.beta2) * (g * g);
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        let delta = eta * m_hat / (v_hat.sqrt() + hp.epsilon);
        *t -= delta;
        update_sq += delta * delta;
    }
    update_sq.sqrt()
}

/// Adam with bias correction:
/// `m' = b1*m + (1-b1)*g`, `v' = b2*v + (1-b2)*g^2`,
/// `m^ = m'/(1-b1^t)`, `v^ = v'/(1-b2^t)`,
/// `theta' = theta - eta0 * m^ / (sqrt(v^) + eps)`.
pub fn adam_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::Adam)?;
    check_shapes(theta, grad)?;
    let update_norm = adam_update(state, theta, grad, hp, hp.eta0);
    Ok(StepReport {
        effective_lr: hp.eta0,
        pre_clip_grad_norm: grad.l2_norm()?,
        clipped: false,
        update_norm,
    })
}

/// The composite scheme: clip the raw gradient, resolve the decayed
/// learning rate `eta0 * gamma^schedule_t`, then take an Adam step with
/// both applied.
///
/// With `gamma = 1` and clipping disabled this is bitwise identical to
/// [`adam_step`].
pub fn composite_step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
    schedule_t: u32,
) -> Result<StepReport> {
    state.expect_kind(OptimizerKind::Composite)?;
    check_shapes(theta, grad)?;
    let pre_clip_grad_norm = grad.l2_norm()?;
    let (clipped_grad, clipped) = clip_gradient(grad, hp.clip_config())?;
    let eta = decayed_lr(hp.eta0, hp.gamma, schedule_t);
    let update_norm = adam_update(state, theta, &clipped_grad, hp, eta);
    Ok(StepReport {
        effective_lr: eta,
        pre_clip_grad_norm,
        clipped,
        update_norm,
    })
}

/// Dispatches on the state's kind. `schedule_t` is only consumed by the
/// composite rule.
pub fn step(
    state: &mut OptimizerState,
    theta: &mut ParamVector,
    grad: &ParamVector,
    hp: &HyperParams,
    schedule_t: u32,
) -> Result<StepReport> {
    match state.kind {
        OptimizerKind::Sgd => sgd_step(state, theta, grad, hp),
        OptimizerKind::Momentum => momentum_step(state, theta, grad, hp),
        OptimizerKind::AdaGrad => adagrad_step(state, theta, grad, hp),
        OptimizerKind::RmsProp => rmsprop_step(state, theta, grad, hp),
        OptimizerKind::Adam => adam_step(state, theta, grad, hp),
        OptimizerKind::Composite => composite_step(state, theta, grad, hp, schedule_t),
    }
}

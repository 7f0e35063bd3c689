//! One-hidden-layer classifier with manual backpropagation.
//!
//! Forward pass: affine -> tanh -> inverted dropout (train mode only)
//! -> affine -> softmax, loss is mean cross-entropy. The backward pass
//! reuses the exact dropout masks of the forward pass, so gradients are
//! a pure function of `(theta, batch, rng state)`.

use crate::error::{Error, Result};
use crate::objectives::dataset::Batch;
use crate::objectives::Objective;
use crate::param_store::{rng_uniform, ParamVector, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Layer-size and dropout metadata for the `d -> h -> 2` network.
/// Weights live in a packed [`ParamVector`], not in the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub dropout_rate: f64,
    pub mode: Mode,
}

const OUTPUTS: usize = 2;

impl MlpModel {
    pub fn new(input_dim: usize, hidden_dim: usize, dropout_rate: f64) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(Error::InvalidConfig(format!(
                "layer sizes must be >= 1, got {input_dim} -> {hidden_dim}"
            )));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidConfig(format!(
                "dropout_rate must be in [0, 1), got {dropout_rate}"
            )));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            dropout_rate,
            mode: Mode::Train,
        })
    }

    pub fn in_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }

    /// Packed parameter length: `d*h + h + h*2 + 2`.
    pub fn packed_len(&self) -> usize {
        let (d, h) = (self.input_dim, self.hidden_dim);
        d * h + h + h * OUTPUTS + OUTPUTS
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let (d, h) = (self.input_dim, self.hidden_dim);
        let b1 = d * h;
        let w2 = b1 + h;
        let b2 = w2 + h * OUTPUTS;
        (b1, w2, b2)
    }

    /// Seeded Glorot-uniform weights, zero biases.
    pub fn init_params(&self, rng: &mut Rng) -> ParamVector {
        let (d, h) = (self.input_dim, self.hidden_dim);
        let mut theta = vec![0.0; self.packed_len()];
        let (b1_off, w2_off, _) = self.offsets();
        let bound1 = (6.0 / (d + h) as f64).sqrt();
        let w1 = rng_uniform(rng, -bound1, bound1, d * h).expect("valid init range");
        theta[..b1_off].copy_from_slice(w1.data());
        let bound2 = (6.0 / (h + OUTPUTS) as f64).sqrt();
        let w2 = rng_uniform(rng, -bound2, bound2, h * OUTPUTS).expect("valid init range");
        theta[w2_off..w2_off + h * OUTPUTS].copy_from_slice(w2.data());
        ParamVector::flat(theta)
    }
}

struct Forward {
    hidden: Vec<f64>,  // tanh activations, before dropout
    dropped: Vec<f64>, // after dropout (aliases hidden values in eval mode)
    masks: Vec<f64>,   // per-unit multiplier actually applied
    probs: [f64; OUTPUTS],
    loss: f64,
}

fn forward_one(model: &MlpModel, theta: &[f64], x: &[f64], label: u8, rng: &mut Rng) -> Forward {
    let h = model.hidden_dim;
    let (b1_off, w2_off, b2_off) = model.offsets();
    let dropout = model.mode == Mode::Train && model.dropout_rate > 0.0;

    let mut hidden = vec![0.0; h];
    for j in 0..h {
        let mut z = theta[b1_off + j];
        for (i, xi) in x.iter().enumerate() {
            z += xi * theta[i * h + j];
        }
        hidden[j] = z.tanh();
    }

    let mut masks = vec![1.0; h];
    let mut dropped = hidden.clone();
    if dropout {
        let keep_scale = 1.0 / (1.0 - model.dropout_rate);
        for j in 0..h {
            masks[j] = if rng.next_f64() < model.dropout_rate {
                0.0
            } else {
                keep_scale
            };
            dropped[j] = hidden[j] * masks[j];
        }
    }

    let mut logits = [0.0; OUTPUTS];
    for (k, logit) in logits.iter_mut().enumerate() {
        let mut z = theta[b2_off + k];
        for (j, a) in dropped.iter().enumerate() {
            z += a * theta[w2_off + j * OUTPUTS + k];
        }
        *logit = z;
    }

    let max = logits[0].max(logits[1]);
    let lse = max + ((logits[0] - max).exp() + (logits[1] - max).exp()).ln();
    let loss = lse - logits[label as usize];
    let probs = [(logits[0] - lse).exp(), (logits[1] - lse).exp()];

    Forward {
        hidden,
        dropped,
        masks,
        probs,
        loss,
    }
}

fn check_inputs(model: &MlpModel, theta: &ParamVector, batch: &Batch) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty batch".into()));
    }
    if batch.dim() != model.input_dim {
        return Err(Error::ShapeMismatch {
            left: vec![model.input_dim],
            right: vec![batch.dim()],
        });
    }
    if theta.len() != model.packed_len() {
        return Err(Error::ShapeMismatch {
            left: vec![model.packed_len()],
            right: vec![theta.len()],
        });
    }
    Ok(())
}

/// Mean cross-entropy loss and its gradient over a batch.
///
/// In train mode each example draws one dropout mask per hidden unit
/// from `rng`; eval mode draws nothing. The gradient goes through the
/// same masks as the forward pass.
pub fn mlp_eval(
    model: &MlpModel,
    theta: &ParamVector,
    batch: &Batch,
    rng: &mut Rng,
) -> Result<(f64, ParamVector)> {
    check_inputs(model, theta, batch)?;
    let (d, h) = (model.input_dim, model.hidden_dim);
    let (b1_off, w2_off, b2_off) = model.offsets();
    let params = theta.data();

    let mut grad = vec![0.0; theta.len()];
    let mut total_loss = 0.0;
    for i in 0..batch.len() {
        let x = batch.feature_row(i);
        let label = batch.label(i);
        let fwd = forward_one(model, params, x, label, rng);
        total_loss += fwd.loss;

        let mut dz2 = fwd.probs;
        dz2[label as usize] -= 1.0;

        let mut d_dropped = vec![0.0; h];
        for (k, &dz) in dz2.iter().enumerate() {
            grad[b2_off + k] += dz;
            for j in 0..h {
                grad[w2_off + j * OUTPUTS + k] += fwd.dropped[j] * dz;
                d_dropped[j] += params[w2_off + j * OUTPUTS + k] * dz;
            }
        }

        for j in 0..h {
            let da = d_dropped[j] * fwd.masks[j];
            let dz1 = da * (1.0 - fwd.hidden[j] * fwd.hidden[j]);
            grad[b1_off + j] += dz1;
            for (i_feat, xi) in x.iter().enumerate().take(d) {
                grad[i_feat * h + j] += xi * dz1;
            }
        }
    }

    let inv_n = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= inv_n;
    }
    Ok((total_loss * inv_n, ParamVector::flat(grad)))
}

/// Eval-mode class predictions (argmax of the softmax).
pub fn mlp_predict(model: &MlpModel, theta: &ParamVector, batch: &Batch) -> Result<Vec<u8>> {
    check_inputs(model, theta, batch)?;
    let eval_model = model.in_mode(Mode::Eval);
    let mut unused = Rng::new(0);
    let params = theta.data();
    Ok((0..batch.len())
        .map(|i| {
            let fwd = forward_one(&eval_model, params, batch.feature_row(i), 0, &mut unused);
            u8::from(fwd.probs[1] > fwd.probs[0])
        })
        .collect())
}

/// Post-dropout hidden activations for one input row; used to check the
/// inverted-dropout expectation.
pub fn hidden_activations(
    model: &MlpModel,
    theta: &ParamVector,
    x: &[f64],
    rng: &mut Rng,
) -> Result<Vec<f64>> {
    if x.len() != model.input_dim || theta.len() != model.packed_len() {
        return Err(Error::ShapeMismatch {
            left: vec![model.input_dim],
            right: vec![x.len()],
        });
    }
    Ok(forward_one(model, theta.data(), x, 0, rng).dropped)
}

/// The MLP as a harness objective over a fixed feature dimension.
#[derive(Debug, Clone)]
pub struct MlpObjective {
    model: MlpModel,
    name: String,
}

impl MlpObjective {
    pub fn new(model: MlpModel) -> Self {
        let name = format!("mlp-{}x{}x{}", model.input_dim, model.hidden_dim, OUTPUTS);
        Self { model, name }
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }
}

impl Objective for MlpObjective {
    fn name(&self) -> &str {
        &self.name
    }

    fn param_count(&self) -> usize {
        self.model.packed_len()
    }

    fn eval(
        &self,
        theta: &ParamVector,
        batch: Option<&Batch>,
        rng: &mut Rng,
    ) -> Result<(f64, ParamVector)> {
        let batch = batch
            .ok_or_else(|| Error::InvalidObjective("mlp objective requires a batch".into()))?;
        mlp_eval(&self.model, theta, batch, rng)
    }

    fn initial_params(&self, rng: &mut Rng) -> ParamVector {
        self.model.init_params(rng)
    }
}

//! L2-norm gradient clipping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param_store::ParamVector;

/// Relative slack on the clip threshold. Vectors whose norm exceeds the
/// threshold by less than this factor are left untouched, which makes
/// re-clipping an already clipped vector a bitwise no-op.
const CLIP_SLACK: f64 = 1e-12;

/// Gradient-clipping configuration. `None` disables clipping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClipConfig {
    pub clip_value: Option<f64>,
}

impl ClipConfig {
    pub fn disabled() -> Self {
        Self { clip_value: None }
    }

    pub fn at(clip_value: f64) -> Result<Self> {
        if !(clip_value > 0.0) {
            return Err(Error::InvalidHyperParams(format!(
                "clip_value must be > 0 when enabled, got {clip_value}"
            )));
        }
        Ok(Self {
            clip_value: Some(clip_value),
        })
    }
}

/// Rescales `g` so its L2 norm does not exceed `clip_value`.
///
/// Returns the (possibly rescaled) gradient and whether clipping fired.
/// A gradient at or below the threshold, a zero vector, or a disabled
/// config passes through bitwise unchanged.
pub fn clip_gradient(g: &ParamVector, clip: ClipConfig) -> Result<(ParamVector, bool)> {
    let norm = g.l2_norm()?;
    let Some(clip_value) = clip.clip_value else {
        return Ok((g.clone(), false));
    };
    if !(clip_value > 0.0) {
        return Err(Error::InvalidHyperParams(format!(
            "clip_value must be > 0 when enabled, got {clip_value}"
        )));
    }
    if norm > clip_value * (1.0 + CLIP_SLACK) {
        let mut clipped = g.clone();
        clipped.scale_in_place(clip_value / norm);
        Ok((clipped, true))
    } else {
        Ok((g.clone(), false))
    }
}

//! Norm clipping of vectors and of stepsize-rescaled Hessian-vector products.

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::numerics::DenseVector;

/// Gradient threshold `lambda` and rescaled HVP threshold `lambda_h_bar`.
/// The effective HVP threshold is `lambda_h = gamma * lambda_h_bar`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClipLevels {
    pub lambda: f64,
    pub lambda_h_bar: f64,
}

impl ClipLevels {
    pub fn new(lambda: f64, lambda_h_bar: f64) -> Result<Self> {
        let levels = Self {
            lambda,
            lambda_h_bar,
        };
        levels.validate()?;
        Ok(levels)
    }

    /// Both thresholds at `+inf`: clipping never activates.
    pub fn inactive() -> Self {
        Self {
            lambda: f64::INFINITY,
            lambda_h_bar: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // +inf is accepted: it is the "never clip" level used by equivalence tests.
        if !(self.lambda > 0.0) || !(self.lambda_h_bar > 0.0) {
            return Err(contract(format!(
                "clip levels must be positive, got lambda={} lambda_h_bar={}",
                self.lambda, self.lambda_h_bar
            )));
        }
        Ok(())
    }

    pub fn lambda_h(&self, gamma: f64) -> f64 {
        gamma * self.lambda_h_bar
    }
}

/// `min{1, level/||v||} v`, with `clip(0, level) = 0`.
pub fn clip(v: &DenseVector, level: f64) -> Result<DenseVector> {
    if !(level > 0.0) {
        return Err(contract(format!(
            "clip level must be positive, got {level}"
        )));
    }
    Ok(clip_with_flag(v, level).0)
}

/// Clip and report whether the threshold was active.
pub(crate) fn clip_with_flag(v: &DenseVector, level: f64) -> (DenseVector, bool) {
    let n = v.norm();
    if n <= level {
        return (v.clone(), false);
    }
    // rounding in `level / n` can leave the result an ulp above `level`
    let mut factor = level / n;
    let mut out = v.scaled(factor);
    while out.norm() > level {
        factor = factor.next_down();
        out = v.scaled(factor);
    }
    (out, true)
}

/// `gamma * clip(hv / gamma, lambda_h_bar)`, evaluated as the single rescale
/// `clip(hv, gamma * lambda_h_bar)`.
pub fn clip_hvp(hv: &DenseVector, gamma: f64, lambda_h_bar: f64) -> Result<DenseVector> {
    Ok(clip_hvp_with_flag(hv, gamma, lambda_h_bar)?.0)
}

pub(crate) fn clip_hvp_with_flag(
    hv: &DenseVector,
    gamma: f64,
    lambda_h_bar: f64,
) -> Result<(DenseVector, bool)> {
    if !(gamma > 0.0) {
        return Err(contract(format!("stepsize must be positive, got {gamma}")));
    }
    if !(lambda_h_bar > 0.0) {
        return Err(contract(format!(
            "hvp clip level must be positive, got {lambda_h_bar}"
        )));
    }
    Ok(clip_with_flag(hv, gamma * lambda_h_bar))
}

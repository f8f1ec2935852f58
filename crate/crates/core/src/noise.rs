//! Additive perturbation samplers and empirical moment estimation.
//!
//! The two-sided Pareto draw is `S * s * U^(-1/p)` with `S = ±1` equiprobable and
//! `U` uniform on `(0, 1]`. Its support is `|X| >= s`, it is symmetric, and
//! `E|X|^q = s^q p / (p - q)` for `q < p` (infinite otherwise).

use rand_distr::{Distribution, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::numerics::{DenseMatrix, DenseVector, RandomSource};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    TwoSidedPareto,
    Gaussian,
    /// Multiplicative Bernoulli noise of the zero-chain oracle. Not an additive
    /// sampler; see [`crate::hardinstance::ZeroChainOracle`].
    BernoulliZeroChain,
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub kind: TailKind,
    /// Pareto tail index; moments of order below it are finite.
    #[serde(default = "default_tail_index")]
    pub tail_index: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default = "default_true")]
    pub per_coordinate: bool,
}

fn default_tail_index() -> f64 {
    2.0
}

fn default_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl TailSpec {
    pub fn pareto(tail_index: f64, scale: f64) -> Self {
        Self {
            kind: TailKind::TwoSidedPareto,
            tail_index,
            scale,
            per_coordinate: true,
        }
    }

    pub fn gaussian(scale: f64) -> Self {
        Self {
            kind: TailKind::Gaussian,
            tail_index: f64::INFINITY,
            scale,
            per_coordinate: true,
        }
    }

    pub fn none() -> Self {
        Self {
            kind: TailKind::None,
            tail_index: f64::INFINITY,
            scale: 1.0,
            per_coordinate: true,
        }
    }

    /// Draw one magnitude, then a uniformly random direction.
    pub fn isotropic(mut self) -> Self {
        self.per_coordinate = false;
        self
    }

    pub fn is_none(&self) -> bool {
        self.kind == TailKind::None
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TailKind::None => Ok(()),
            TailKind::TwoSidedPareto if !(self.tail_index > 1.0) => Err(contract(format!(
                "pareto tail index must exceed 1 for the mean to exist, got {}",
                self.tail_index
            ))),
            _ if !(self.scale > 0.0 && self.scale.is_finite()) => Err(contract(format!(
                "noise scale must be positive, got {}",
                self.scale
            ))),
            _ => Ok(()),
        }
    }

    /// Closed-form `E|X|^q` of the scalar sampler, `None` when infinite.
    pub fn scalar_abs_moment(&self, q: f64) -> Option<f64> {
        match self.kind {
            TailKind::None => Some(0.0),
            TailKind::TwoSidedPareto => (q < self.tail_index)
                .then(|| self.scale.powf(q) * self.tail_index / (self.tail_index - q)),
            TailKind::Gaussian => {
                // E|N(0, s^2)|^q = s^q 2^{q/2} Gamma((q+1)/2) / sqrt(pi)
                let g = libm::tgamma((q + 1.0) / 2.0);
                Some(self.scale.powf(q) * 2f64.powf(q / 2.0) * g / std::f64::consts::PI.sqrt())
            }
            TailKind::BernoulliZeroChain => None,
        }
    }

    /// Upper bound on the p-BCM constant `sigma` of the per-coordinate noise
    /// vector in dimension `dim`: `E||N||^p <= E sum |X_i|^p` for `p <= 2`.
    pub fn vector_bcm_bound(&self, p: f64, dim: usize) -> Option<f64> {
        let m = self.scalar_abs_moment(p)?;
        Some((dim as f64 * m).powf(1.0 / p))
    }

    /// Same bound for the symmetrized matrix noise, via
    /// `||E||_op <= ||E||_F <= (sum |E_ij|^p)^{1/p}` and convexity of `|.|^p`.
    pub fn matrix_bcm_bound(&self, p: f64, dim: usize) -> Option<f64> {
        let m = self.scalar_abs_moment(p)?;
        Some(((dim * dim) as f64 * m).powf(1.0 / p))
    }
}

pub fn sample_two_sided_pareto(spec: &TailSpec, r: &mut RandomSource) -> Result<f64> {
    if spec.kind != TailKind::TwoSidedPareto {
        return Err(contract(
            "sample_two_sided_pareto needs a two-sided-pareto spec",
        ));
    }
    spec.validate()?;
    Ok(pareto_unchecked(spec, r))
}

fn pareto_unchecked(spec: &TailSpec, r: &mut RandomSource) -> f64 {
    let sign = r.sign();
    let magnitude = Pareto::new(spec.scale, spec.tail_index)
        .expect("validated pareto parameters")
        .sample(r);
    sign * magnitude
}

fn scalar_draw(spec: &TailSpec, r: &mut RandomSource) -> Result<f64> {
    match spec.kind {
        TailKind::None => Ok(0.0),
        TailKind::TwoSidedPareto => Ok(pareto_unchecked(spec, r)),
        TailKind::Gaussian => Ok(spec.scale * r.standard_normal()),
        TailKind::BernoulliZeroChain => Err(contract(
            "bernoulli-zero-chain noise is multiplicative; query a ZeroChainOracle instead",
        )),
    }
}

pub fn sample_noise_vector(
    spec: &TailSpec,
    dim: usize,
    r: &mut RandomSource,
) -> Result<DenseVector> {
    if dim == 0 {
        return Err(contract("noise dimension must be at least 1"));
    }
    spec.validate()?;
    if spec.is_none() {
        return Ok(DenseVector::zeros(dim));
    }
    if spec.per_coordinate {
        let entries = (0..dim)
            .map(|_| scalar_draw(spec, r))
            .collect::<Result<Vec<_>>>()?;
        return Ok(DenseVector::from_vec_unchecked(entries));
    }
    let magnitude = scalar_draw(spec, r)?.abs();
    loop {
        let dir = r.standard_normal_vector(dim);
        let n = dir.norm();
        if n > 0.0 {
            return Ok(dir.scaled(magnitude / n));
        }
    }
}

/// Symmetric zero-mean matrix `(A + A^T) / 2` with i.i.d. scalar entries in `A`.
pub fn sample_noise_matrix(
    spec: &TailSpec,
    dim: usize,
    r: &mut RandomSource,
) -> Result<DenseMatrix> {
    if dim == 0 {
        return Err(contract("noise dimension must be at least 1"));
    }
    spec.validate()?;
    if spec.is_none() {
        return Ok(DenseMatrix::zeros(dim));
    }
    let entries = (0..dim * dim)
        .map(|_| scalar_draw(spec, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(DenseMatrix::from_row_major(dim, entries)?.symmetrized())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub order: f64,
    pub value: f64,
    pub sample_count: usize,
    pub std_error: f64,
}

/// Empirical `mean |x|^order` with a jackknife standard error.
pub fn estimate_moment(samples: &[f64], order: f64) -> Result<MomentEstimate> {
    if samples.is_empty() {
        return Err(contract("estimate_moment needs at least one sample"));
    }
    if !(order > 0.0) {
        return Err(contract(format!(
            "moment order must be positive, got {order}"
        )));
    }
    let n = samples.len();
    let powered: Vec<f64> = samples.iter().map(|x| x.abs().powf(order)).collect();
    let total: f64 = powered.iter().sum();
    let value = total / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let nf = n as f64;
        // leave-one-out means theta_i = (total - y_i) / (n - 1)
        let loo_mean = value;
        let ss: f64 = powered
            .iter()
            .map(|y| {
                let theta = (total - y) / (nf - 1.0);
                (theta - loo_mean).powi(2)
            })
            .sum();
        ((nf - 1.0) / nf * ss).sqrt()
    };
    Ok(MomentEstimate {
        order,
        value,
        sample_count: n,
        std_error,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustMean {
    pub estimate: f64,
    /// `1.4826 * MAD(group means) * sqrt(pi/2) / sqrt(groups)`.
    pub std_error: f64,
    pub groups: usize,
}

/// Median of the means of `groups` contiguous blocks.
pub fn median_of_means(samples: &[f64], groups: usize) -> Result<RobustMean> {
    if groups == 0 || samples.len() < groups {
        return Err(contract(format!(
            "median_of_means: {} samples cannot fill {groups} groups",
            samples.len()
        )));
    }
    let block = samples.len() / groups;
    let mut means: Vec<f64> = samples
        .chunks_exact(block)
        .take(groups)
        .map(|c| c.iter().sum::<f64>() / block as f64)
        .collect();
    let estimate = median(&mut means);
    let mut dev: Vec<f64> = means.iter().map(|m| (m - estimate).abs()).collect();
    let mad = median(&mut dev);
    let std_error = 1.4826 * mad * (std::f64::consts::PI / 2.0).sqrt() / (groups as f64).sqrt();
    Ok(RobustMean {
        estimate,
        std_error,
        groups,
    })
}

pub(crate) fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

//! NSGD, NSGDM, Clip NSGDM and the Hessian-corrected methods (NSGDHess and
//! Clip NSGDHess) behind one stepping interface.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clipping::{clip_hvp_with_flag, clip_with_flag, ClipLevels};
use crate::error::{config, contract, Error, Result};
use crate::numerics::{DenseVector, RandomSource};
use crate::problems::StochasticOracle;
pub use crate::schedules::G0Init;
use crate::schedules::Schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Nsgd,
    Nsgdm,
    ClipNsgdm,
    NsgdHess,
    ClipNsgdHess,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Nsgd,
        Method::Nsgdm,
        Method::ClipNsgdm,
        Method::NsgdHess,
        Method::ClipNsgdHess,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Method::Nsgd => "nsgd",
            Method::Nsgdm => "nsgdm",
            Method::ClipNsgdm => "clip-nsgdm",
            Method::NsgdHess => "nsgd-hess",
            Method::ClipNsgdHess => "clip-nsgd-hess",
        }
    }

    pub fn uses_hvp(&self) -> bool {
        matches!(self, Method::NsgdHess | Method::ClipNsgdHess)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.label() == s)
            .ok_or_else(|| config(format!("unknown method '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub x_prev: DenseVector,
    pub x_curr: DenseVector,
    pub g: DenseVector,
    pub t: usize,
    pub samples_used: u64,
}

impl OptimizerState {
    /// `x_prev = x_curr = x0`, `g = 0`.
    pub fn at(x0: DenseVector) -> Self {
        let d = x0.dim();
        Self {
            x_prev: x0.clone(),
            x_curr: x0,
            g: DenseVector::zeros(d),
            t: 0,
            samples_used: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    /// `||grad F(x_t)||` at the point the step was taken from.
    pub grad_norm_exact: f64,
    pub momentum_norm: f64,
    pub grad_clip_active: bool,
    pub hvp_clip_active: bool,
    pub q_t: Option<f64>,
}

/// Independent random streams of one run: interpolation weights, gradient
/// samples and Hessian samples.
#[derive(Clone, Debug)]
pub struct RunStreams {
    pub q: RandomSource,
    pub grad: RandomSource,
    pub hvp: RandomSource,
}

impl RunStreams {
    pub fn new(seed: u64) -> Self {
        Self {
            q: RandomSource::new(seed, 1),
            grad: RandomSource::new(seed, 2),
            hvp: RandomSource::new(seed, 3),
        }
    }
}

fn check_step_params(gamma: f64, alpha: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(contract(format!("stepsize must be positive, got {gamma}")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(contract(format!(
            "momentum must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Average of `b` noisy gradients at `x0`, or one of the deterministic variants.
pub fn init_g0(
    oracle: &dyn StochasticOracle,
    x0: &DenseVector,
    init: G0Init,
    r: &mut RandomSource,
) -> Result<(DenseVector, u64)> {
    match init {
        G0Init::Batch(0) => Err(contract("initial batch size must be at least 1")),
        G0Init::Batch(1) => Ok((oracle.noisy_gradient(x0, r)?, 1)),
        G0Init::Batch(b) => {
            let mut sum = DenseVector::zeros(x0.dim());
            for _ in 0..b {
                sum.axpy(1.0, &oracle.noisy_gradient(x0, r)?);
            }
            Ok((sum.scaled(1.0 / b as f64), b))
        }
        G0Init::Exact => Ok((oracle.exact_gradient(x0), 0)),
        G0Init::Zero => Ok((DenseVector::zeros(x0.dim()), 0)),
    }
}

/// `x - gamma g / ||g||`, or `x` when `g = 0`.
pub fn normalized_step(x: &DenseVector, g: &DenseVector, gamma: f64) -> DenseVector {
    let n = g.norm();
    let mut out = x.clone();
    if n > 0.0 {
        out.axpy(-gamma / n, g);
    }
    out
}

/// Stochastic HVP at `q x_curr + (1 - q) x_prev` applied to `x_curr - x_prev`:
/// an unbiased estimate of `grad F(x_curr) - grad F(x_prev)` when `q ~ U[0, 1]`.
pub fn hessian_correction(
    oracle: &dyn StochasticOracle,
    x_prev: &DenseVector,
    x_curr: &DenseVector,
    q: f64,
    r: &mut RandomSource,
) -> Result<DenseVector> {
    let x_hat = x_curr.interpolate(x_prev, q);
    oracle.noisy_hvp(&x_hat, &(x_curr - x_prev), r)
}

fn advance(state: &mut OptimizerState, g: DenseVector, gamma: f64) {
    let next = normalized_step(&state.x_curr, &g, gamma);
    state.x_prev = std::mem::replace(&mut state.x_curr, next);
    state.g = g;
    state.t += 1;
}

fn first_order_step(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    lambda: Option<f64>,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    check_step_params(gamma, alpha)?;
    let grad_norm_exact = oracle.exact_gradient(&state.x_curr).norm();
    let raw = oracle.noisy_gradient(&state.x_curr, &mut streams.grad)?;
    let (grad, clipped) = match lambda {
        Some(l) => clip_with_flag(&raw, l),
        None => (raw, false),
    };
    let g = DenseVector::from_vec_unchecked(
        state
            .g
            .iter()
            .zip(grad.iter())
            .map(|(gp, gi)| (1.0 - alpha) * gp + alpha * gi)
            .collect(),
    );
    state.samples_used += 1;
    let momentum_norm = g.norm();
    advance(state, g, gamma);
    Ok(StepReport {
        grad_norm_exact,
        momentum_norm,
        grad_clip_active: clipped,
        hvp_clip_active: false,
        q_t: None,
    })
}

/// Plain normalized SGD: `g_t` is the fresh stochastic gradient.
pub fn step_nsgd(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    check_step_params(gamma, 1.0)?;
    let grad_norm_exact = oracle.exact_gradient(&state.x_curr).norm();
    let g = oracle.noisy_gradient(&state.x_curr, &mut streams.grad)?;
    state.samples_used += 1;
    let momentum_norm = g.norm();
    advance(state, g, gamma);
    Ok(StepReport {
        grad_norm_exact,
        momentum_norm,
        grad_clip_active: false,
        hvp_clip_active: false,
        q_t: None,
    })
}

/// `g_t = (1 - alpha) g_{t-1} + alpha grad f(x_t, xi_t)`.
pub fn step_nsgdm(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    first_order_step(state, oracle, gamma, alpha, None, streams)
}

/// `g_t = (1 - alpha) g_{t-1} + alpha clip(grad f(x_t, xi_t), lambda)`.
pub fn step_clip_nsgdm(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    lambda: f64,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    if !(lambda > 0.0) {
        return Err(contract(format!(
            "clip level must be positive, got {lambda}"
        )));
    }
    first_order_step(state, oracle, gamma, alpha, Some(lambda), streams)
}

fn hess_step(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    levels: Option<ClipLevels>,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    check_step_params(gamma, alpha)?;
    if let Some(l) = levels {
        l.validate()?;
    }
    let grad_norm_exact = oracle.exact_gradient(&state.x_curr).norm();
    let q = streams.q.uniform_unit();
    let corr = hessian_correction(oracle, &state.x_prev, &state.x_curr, q, &mut streams.hvp)?;
    let grad = oracle.noisy_gradient(&state.x_curr, &mut streams.grad)?;
    let (corr, hvp_clipped, grad, grad_clipped) = match levels {
        Some(l) => {
            let (c, hc) = clip_hvp_with_flag(&corr, gamma, l.lambda_h_bar)?;
            let (g, gc) = clip_with_flag(&grad, l.lambda);
            (c, hc, g, gc)
        }
        None => (corr, false, grad, false),
    };
    let g = DenseVector::from_vec_unchecked(
        state
            .g
            .iter()
            .zip(corr.iter())
            .zip(grad.iter())
            .map(|((gp, ci), gi)| (1.0 - alpha) * (gp + ci) + alpha * gi)
            .collect(),
    );
    state.samples_used += 2;
    let momentum_norm = g.norm();
    advance(state, g, gamma);
    Ok(StepReport {
        grad_norm_exact,
        momentum_norm,
        grad_clip_active: grad_clipped,
        hvp_clip_active: hvp_clipped,
        q_t: Some(q),
    })
}

/// One iteration of the Hessian-corrected momentum method.
pub fn step_nsgdhess(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    hess_step(state, oracle, gamma, alpha, None, streams)
}

/// One iteration with the gradient clipped at `lambda` and the HVP at `gamma * lambda_h_bar`.
pub fn step_clip_nsgdhess(
    state: &mut OptimizerState,
    oracle: &dyn StochasticOracle,
    gamma: f64,
    alpha: f64,
    levels: ClipLevels,
    streams: &mut RunStreams,
) -> Result<StepReport> {
    hess_step(state, oracle, gamma, alpha, Some(levels), streams)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub method: Method,
    pub seed: u64,
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub lambda_h_bar: Option<f64>,
    pub b_init: u64,
    pub provenance: String,
    pub config_hash: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub grad_norm: f64,
    pub momentum_norm: f64,
    pub grad_clip: bool,
    pub hvp_clip: bool,
    pub q_t: Option<f64>,
    pub samples_used: u64,
}

/// Row `t` describes iterate `x_t` and the momentum `g_t` formed there.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn min_grad_norm(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.grad_norm)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn avg_grad_norm(&self) -> f64 {
        self.rows.iter().map(|r| r.grad_norm).sum::<f64>() / self.rows.len() as f64
    }

    pub fn terminal_grad_norm(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.grad_norm)
    }

    /// First `t` with `||grad F(x_t)|| <= target`.
    pub fn iterations_to_target(&self, target: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.grad_norm <= target)
            .map(|r| r.t)
    }
}

/// Which method to run and how its `g0` is formed (`None` takes the schedule's).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub method: Method,
    pub g0: Option<G0Init>,
}

impl OptimizerSpec {
    pub fn new(method: Method) -> Self {
        Self { method, g0: None }
    }

    pub fn with_g0(mut self, g0: G0Init) -> Self {
        self.g0 = Some(g0);
        self
    }
}

/// Run `t_max` iterations from `x0`.
pub fn run(
    spec: &OptimizerSpec,
    oracle: &dyn StochasticOracle,
    schedule: &Schedule,
    x0: &DenseVector,
    t_max: usize,
    seed: u64,
) -> Result<RunTrace> {
    run_observed(spec, oracle, schedule, x0, t_max, seed, |_, _| {})
}

/// Like [`run`], calling `observe` with the state after every recorded row.
pub fn run_observed(
    spec: &OptimizerSpec,
    oracle: &dyn StochasticOracle,
    schedule: &Schedule,
    x0: &DenseVector,
    t_max: usize,
    seed: u64,
    mut observe: impl FnMut(&OptimizerState, &StepReport),
) -> Result<RunTrace> {
    if t_max < 1 {
        return Err(contract("iteration count T must be at least 1"));
    }
    schedule.validate()?;
    x0.check_dim(oracle.dim(), "initial point")?;
    x0.check_finite("initial point")?;
    let (gamma, alpha) = (schedule.gamma, schedule.alpha);
    let method = spec.method;
    let levels = match method {
        Method::ClipNsgdHess => Some(schedule.clip_levels().ok_or_else(|| {
            config("clip-nsgd-hess needs both lambda and lambda_h_bar in its schedule")
        })?),
        _ => None,
    };
    let lambda = match method {
        Method::ClipNsgdm => Some(
            schedule
                .lambda
                .ok_or_else(|| config("clip-nsgdm needs lambda in its schedule"))?,
        ),
        _ => None,
    };
    let g0 = match method {
        Method::ClipNsgdHess => G0Init::Zero,
        _ => spec.g0.unwrap_or(schedule.g0),
    };

    let mut streams = RunStreams::new(seed);
    let mut state = OptimizerState::at(x0.clone());
    let mut rows = Vec::with_capacity(t_max);
    let mut push = |rows: &mut Vec<TraceRow>, state: &OptimizerState, rep: &StepReport| {
        rows.push(TraceRow {
            t: rows.len(),
            grad_norm: rep.grad_norm_exact,
            momentum_norm: rep.momentum_norm,
            grad_clip: rep.grad_clip_active,
            hvp_clip: rep.hvp_clip_active,
            q_t: rep.q_t,
            samples_used: state.samples_used,
        });
        observe(state, rep);
    };

    if method.uses_hvp() {
        let (g, used) = init_g0(oracle, x0, g0, &mut streams.grad)?;
        state.samples_used += used;
        let rep = StepReport {
            grad_norm_exact: oracle.exact_gradient(x0).norm(),
            momentum_norm: g.norm(),
            grad_clip_active: false,
            hvp_clip_active: false,
            q_t: None,
        };
        advance(&mut state, g, gamma);
        push(&mut rows, &state, &rep);
    }
    while rows.len() < t_max {
        let rep = match method {
            Method::Nsgd => step_nsgd(&mut state, oracle, gamma, &mut streams)?,
            Method::Nsgdm => step_nsgdm(&mut state, oracle, gamma, alpha, &mut streams)?,
            Method::ClipNsgdm => step_clip_nsgdm(
                &mut state,
                oracle,
                gamma,
                alpha,
                lambda.unwrap_or(f64::INFINITY),
                &mut streams,
            )?,
            Method::NsgdHess => step_nsgdhess(&mut state, oracle, gamma, alpha, &mut streams)?,
            Method::ClipNsgdHess => step_clip_nsgdhess(
                &mut state,
                oracle,
                gamma,
                alpha,
                levels.unwrap_or(ClipLevels::inactive()),
                &mut streams,
            )?,
        };
        push(&mut rows, &state, &rep);
    }

    let header = TraceHeader {
        method,
        seed,
        gamma,
        alpha,
        lambda: schedule.lambda,
        lambda_h_bar: schedule.lambda_h_bar,
        b_init: if method.uses_hvp() {
            match g0 {
                G0Init::Batch(b) => b,
                _ => 0,
            }
        } else {
            0
        },
        provenance: schedule.provenance.label().to_string(),
        config_hash: None,
    };
    Ok(RunTrace { header, rows })
}

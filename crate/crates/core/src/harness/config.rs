//! TOML experiment configuration.
//!
//! ```toml
//! experiment = "fig2"
//! iterations = 4000
//! target = 1.5
//! seeds = [0, 1, 2]
//!
//! [problem]
//! kind = "quadratic"
//! dim = 10
//! x0_seed = 0
//! noise = { kind = "two-sided-pareto", tail_index = 1.1, scale = 1.0 }
//! hessian_noise = { kind = "two-sided-pareto", tail_index = 1.1, scale = 1.0 }
//!
//! [optimizer]
//! method = "clip-nsgd-hess"
//! gamma = 0.01
//! alpha = 0.2
//! lambda = 1.0
//! lambda_h_bar = 100.0
//!
//! [sweep]
//! lambdas = [1e-16, 1e-8, 1.0, 1e2, 1e3]
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{config, Result};
use crate::noise::TailSpec;
use crate::numerics::{DenseVector, RandomSource};
use crate::optimizers::Method;
use crate::problems::{QuadraticProblem, StochasticOracle, WellsProblem};
use crate::schedules::{G0Init, Schedule};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Run,
    Fig2,
    ClipSensitivity,
    Fig4,
    Fig5,
    Rate,
}

impl ExperimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            ExperimentKind::Run => "run",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::ClipSensitivity => "clip-sensitivity",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Fig5 => "fig5",
            ExperimentKind::Rate => "rate",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Quadratic,
    Wells,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_problem_kind")]
    pub kind: ProblemKind,
    #[serde(default = "default_dim")]
    pub dim: usize,
    /// Seed of the standard normal starting point shared by all runs.
    #[serde(default)]
    pub x0_seed: u64,
    #[serde(default = "default_noise")]
    pub noise: TailSpec,
    #[serde(default = "TailSpec::none")]
    pub hessian_noise: TailSpec,
    /// Weight of the quadratic tether of the wells problem.
    #[serde(default = "default_tether")]
    pub tether: f64,
}

fn default_problem_kind() -> ProblemKind {
    ProblemKind::Quadratic
}
fn default_dim() -> usize {
    10
}
fn default_noise() -> TailSpec {
    TailSpec::pareto(1.1, 1.0)
}
fn default_tether() -> f64 {
    0.1
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            kind: ProblemKind::Quadratic,
            dim: 10,
            x0_seed: 0,
            noise: default_noise(),
            hessian_noise: TailSpec::none(),
            tether: default_tether(),
        }
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Box<dyn StochasticOracle>> {
        Ok(match self.kind {
            ProblemKind::Quadratic => Box::new(QuadraticProblem::new(
                self.dim,
                self.noise,
                self.hessian_noise,
            )?),
            ProblemKind::Wells => Box::new(WellsProblem::new(
                self.dim,
                self.tether,
                self.noise,
                self.hessian_noise,
            )?),
        })
    }

    /// Standard normal `x0` drawn from `x0_seed`.
    pub fn x0(&self) -> DenseVector {
        RandomSource::new(self.x0_seed, 0).standard_normal_vector(self.dim)
    }

    pub fn with_tail_index(&self, tail_index: f64) -> Self {
        let mut out = self.clone();
        out.noise.tail_index = tail_index;
        if !out.hessian_noise.is_none() {
            out.hessian_noise.tail_index = tail_index;
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_h_bar: Option<f64>,
    /// Initial batch of NSGDHess; 0 selects `g0 = 0`.
    #[serde(default = "default_b_init")]
    pub b_init: u64,
}

fn default_method() -> Method {
    Method::ClipNsgdHess
}
fn default_gamma() -> f64 {
    0.01
}
fn default_alpha() -> f64 {
    0.2
}
fn default_b_init() -> u64 {
    1
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            gamma: default_gamma(),
            alpha: default_alpha(),
            lambda: Some(1.0),
            lambda_h_bar: Some(100.0),
            b_init: 1,
        }
    }
}

impl OptimizerConfig {
    pub fn schedule(&self) -> Result<Schedule> {
        let g0 = if self.b_init == 0 {
            G0Init::Zero
        } else {
            G0Init::Batch(self.b_init)
        };
        let mut s = Schedule::manual(self.gamma, self.alpha)?.with_g0(g0);
        s.lambda = self.lambda;
        s.lambda_h_bar = self.lambda_h_bar;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Gradient clip levels of the clip-sensitivity sweep.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<f64>,
    /// Rescaled HVP clip levels, one per entry of `lambda_grids`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_h_bars: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_grids: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tail_indices: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub horizons: Vec<usize>,
    /// Moment orders `p` of the rate check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub moment_orders: Vec<f64>,
    /// Tail index minus moment order in the rate check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: ExperimentKind,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

fn default_experiment() -> ExperimentKind {
    ExperimentKind::Run
}
fn default_iterations() -> usize {
    4000
}
fn default_target() -> f64 {
    1.5
}
fn default_seeds() -> Vec<u64> {
    (0..21).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: default_experiment(),
            iterations: default_iterations(),
            target: default_target(),
            seeds: default_seeds(),
            out: None,
            problem: ProblemConfig::default(),
            optimizer: OptimizerConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

fn hessian_noise_on() -> TailSpec {
    TailSpec::pareto(1.1, 1.0)
}

impl ExperimentConfig {
    /// Unclipped against clipped methods at tail index 1.1.
    pub fn fig2() -> Self {
        let mut c = Self {
            experiment: ExperimentKind::Fig2,
            ..Self::default()
        };
        c.problem.hessian_noise = hessian_noise_on();
        c
    }

    /// Clip NSGDHess over a gradient clip grid, with `lambda_h_bar = lambda / gamma`.
    pub fn clip_sensitivity() -> Self {
        let mut c = Self {
            experiment: ExperimentKind::ClipSensitivity,
            ..Self::default()
        };
        c.problem.hessian_noise = hessian_noise_on();
        c.sweep.lambdas = vec![1e-16, 1e-8, 1.0, 1e2, 1e3];
        c
    }

    /// Clip NSGDHess against Clip NSGDM over tail indices.
    pub fn fig4() -> Self {
        let mut c = Self {
            experiment: ExperimentKind::Fig4,
            ..Self::default()
        };
        c.problem.hessian_noise = hessian_noise_on();
        c.optimizer.lambda = Some(0.5);
        c.optimizer.lambda_h_bar = Some(0.05);
        c.sweep.tail_indices = (11..=20).map(|k| k as f64 / 10.0).collect();
        c
    }

    /// Gradient clip sweeps at three HVP clip levels, target 1/2.
    pub fn fig5() -> Self {
        let mut c = Self {
            experiment: ExperimentKind::Fig5,
            iterations: 10_000,
            target: 0.5,
            ..Self::default()
        };
        c.problem.hessian_noise = hessian_noise_on();
        c.sweep.lambda_h_bars = vec![0.01, 1.0, 100.0];
        let decades = |lo: i32, hi: i32| (lo..=hi).map(|k| 10f64.powi(k)).collect::<Vec<_>>();
        c.sweep.lambda_grids = vec![decades(-4, 2), decades(-2, 4), decades(0, 6)];
        c
    }

    /// Average gradient norm of Clip NSGDHess against the horizon.
    pub fn rate() -> Self {
        let mut c = Self {
            experiment: ExperimentKind::Rate,
            ..Self::default()
        };
        c.problem.hessian_noise = hessian_noise_on();
        c.sweep.horizons = (8..=14).map(|k| 1usize << k).collect();
        c.sweep.moment_orders = vec![1.5, 2.0];
        c.sweep.tail_margin = Some(0.5);
        c
    }

    pub fn preset(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Run => Self::default(),
            ExperimentKind::Fig2 => Self::fig2(),
            ExperimentKind::ClipSensitivity => Self::clip_sensitivity(),
            ExperimentKind::Fig4 => Self::fig4(),
            ExperimentKind::Fig5 => Self::fig5(),
            ExperimentKind::Rate => Self::rate(),
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form, in hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn with_seed_count(mut self, n: usize, first: u64) -> Self {
        self.seeds = (first..first + n as u64).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(config("iterations must be at least 1"));
        }
        if !(self.target > 0.0) {
            return Err(config(format!(
                "target must be positive, got {}",
                self.target
            )));
        }
        if self.seeds.is_empty() {
            return Err(config("seed list is empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(config("seeds must be distinct"));
        }
        if self.problem.dim == 0 {
            return Err(config("problem dimension must be at least 1"));
        }
        self.problem.noise.validate()?;
        self.problem.hessian_noise.validate()?;
        match self.experiment {
            ExperimentKind::ClipSensitivity if self.sweep.lambdas.is_empty() => Err(config(
                "clip-sensitivity needs a non-empty sweep.lambdas grid",
            )),
            ExperimentKind::Fig4 if self.sweep.tail_indices.is_empty() => {
                Err(config("fig4 needs a non-empty sweep.tail_indices grid"))
            }
            ExperimentKind::Fig5 => {
                if self.sweep.lambda_h_bars.is_empty()
                    || self.sweep.lambda_grids.len() != self.sweep.lambda_h_bars.len()
                    || self.sweep.lambda_grids.iter().any(Vec::is_empty)
                {
                    Err(config(
                        "fig5 needs one non-empty sweep.lambda_grids entry per sweep.lambda_h_bars value",
                    ))
                } else {
                    Ok(())
                }
            }
            ExperimentKind::Rate
                if self.sweep.horizons.len() < 2 || self.sweep.moment_orders.is_empty() =>
            {
                Err(config(
                    "rate needs at least two sweep.horizons and one sweep.moment_orders value",
                ))
            }
            _ => Ok(()),
        }
    }
}

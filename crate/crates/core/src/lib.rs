//! Normalized SGD with Hessian-corrected momentum and gradient/Hessian
//! clipping, for stochastic nonconvex problems with heavy-tailed noise.
//!
//! The crate provides the methods ([`optimizers`]), their parameter schedules
//! ([`schedules`]), test problems and oracles ([`problems`], [`noise`]), the
//! chain-structured hard instance ([`hardinstance`]) and seeded experiment
//! drivers with CSV output ([`harness`]).

pub mod clipping;
pub mod error;
pub mod hardinstance;
pub mod harness;
pub mod noise;
pub mod numerics;
pub mod optimizers;
pub mod problems;
pub mod schedules;

pub use clipping::{clip, clip_hvp, ClipLevels};
pub use error::{Error, Result};
pub use numerics::{DenseMatrix, DenseVector, RandomSource};
pub use optimizers::{run, Method, OptimizerSpec, RunTrace};
pub use problems::{QuadraticProblem, StochasticOracle};
pub use schedules::{G0Init, Schedule};

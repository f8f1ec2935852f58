//! Stochastic first/second-order oracles and the built-in test problems.
//!
//! An oracle exposes the exact objective, gradient and Hessian together with
//! unbiased noisy gradient and Hessian-vector-product queries. Each noisy query
//! consumes exactly one sample from the caller's [`RandomSource`].

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::noise::{sample_noise_matrix, sample_noise_vector, TailSpec};
use crate::numerics::{DenseMatrix, DenseVector, RandomSource};

/// Problem constants an oracle declares. Schedules that need an undeclared
/// constant are refused.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleConstants {
    /// Gradient Lipschitz constant `L`.
    pub smoothness: Option<f64>,
    /// Lower bound `F*` on the objective.
    pub f_star: Option<f64>,
    pub hessian_lipschitz: Option<f64>,
}

pub trait StochasticOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn exact_value(&self, x: &DenseVector) -> f64;

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector;

    fn exact_hessian(&self, x: &DenseVector) -> DenseMatrix;

    fn exact_hvp(&self, x: &DenseVector, v: &DenseVector) -> DenseVector {
        self.exact_hessian(x).matvec_unchecked(v)
    }

    /// Unbiased estimate of `exact_gradient(x)`.
    fn noisy_gradient(&self, x: &DenseVector, r: &mut RandomSource) -> Result<DenseVector>;

    /// Unbiased estimate of `exact_hessian(x) v`.
    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        r: &mut RandomSource,
    ) -> Result<DenseVector>;

    fn constants(&self) -> OracleConstants;

    fn name(&self) -> &str;
}

fn check_point(x: &DenseVector, dim: usize, what: &str) -> Result<()> {
    x.check_dim(dim, what)?;
    x.check_finite(what)
}

/// `grad + N` with `N` drawn from `spec`.
fn additive_gradient(
    grad: DenseVector,
    spec: &TailSpec,
    r: &mut RandomSource,
) -> Result<DenseVector> {
    if spec.is_none() {
        return Ok(grad);
    }
    let noise = sample_noise_vector(spec, grad.dim(), r)?;
    Ok(&grad + &noise)
}

/// `hv + E v` with `E` a symmetric noise matrix drawn from `spec`.
fn additive_hvp(
    hv: DenseVector,
    v: &DenseVector,
    spec: &TailSpec,
    r: &mut RandomSource,
) -> Result<DenseVector> {
    if spec.is_none() {
        return Ok(hv);
    }
    let e = sample_noise_matrix(spec, v.dim(), r)?;
    Ok(&hv + &e.matvec_unchecked(v))
}

/// `F(x) = 0.5 ||x||^2` with additive gradient noise and optional Hessian noise.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticProblem {
    dim: usize,
    pub noise: TailSpec,
    pub hessian_noise: TailSpec,
}

impl QuadraticProblem {
    pub fn new(dim: usize, noise: TailSpec, hessian_noise: TailSpec) -> Result<Self> {
        if dim == 0 {
            return Err(contract("problem dimension must be at least 1"));
        }
        noise.validate()?;
        hessian_noise.validate()?;
        Ok(Self {
            dim,
            noise,
            hessian_noise,
        })
    }

    pub fn noiseless(dim: usize) -> Self {
        Self {
            dim,
            noise: TailSpec::none(),
            hessian_noise: TailSpec::none(),
        }
    }
}

impl StochasticOracle for QuadraticProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn exact_value(&self, x: &DenseVector) -> f64 {
        0.5 * x.dot(x)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        x.clone()
    }

    fn exact_hessian(&self, _x: &DenseVector) -> DenseMatrix {
        DenseMatrix::identity(self.dim)
    }

    fn exact_hvp(&self, _x: &DenseVector, v: &DenseVector) -> DenseVector {
        v.clone()
    }

    fn noisy_gradient(&self, x: &DenseVector, r: &mut RandomSource) -> Result<DenseVector> {
        check_point(x, self.dim, "noisy_gradient")?;
        additive_gradient(x.clone(), &self.noise, r)
    }

    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        r: &mut RandomSource,
    ) -> Result<DenseVector> {
        check_point(x, self.dim, "noisy_hvp")?;
        check_point(v, self.dim, "noisy_hvp direction")?;
        additive_hvp(v.clone(), v, &self.hessian_noise, r)
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants {
            smoothness: Some(1.0),
            f_star: Some(0.0),
            hessian_lipschitz: Some(0.0),
        }
    }

    fn name(&self) -> &str {
        "quadratic"
    }
}

/// Nonconvex `F(x) = sum_i x_i^2 / (1 + x_i^2) + (tether / 2) ||x||^2`.
///
/// Each well has curvature `(2 - 6x^2) / (1 + x^2)^3`, negative for `|x| > 1/sqrt(3)`,
/// so `L = 2 + tether` and `F* = 0` at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct WellsProblem {
    dim: usize,
    pub tether: f64,
    pub noise: TailSpec,
    pub hessian_noise: TailSpec,
}

impl WellsProblem {
    pub fn new(dim: usize, tether: f64, noise: TailSpec, hessian_noise: TailSpec) -> Result<Self> {
        if dim == 0 {
            return Err(contract("problem dimension must be at least 1"));
        }
        if !(tether >= 0.0 && tether.is_finite()) {
            return Err(contract(format!(
                "tether weight must be nonnegative, got {tether}"
            )));
        }
        noise.validate()?;
        hessian_noise.validate()?;
        Ok(Self {
            dim,
            tether,
            noise,
            hessian_noise,
        })
    }

    fn curvature(&self, xi: f64) -> f64 {
        let s = 1.0 + xi * xi;
        (2.0 - 6.0 * xi * xi) / (s * s * s) + self.tether
    }
}

impl StochasticOracle for WellsProblem {
    fn dim(&self) -> usize {
        self.dim
    }

    fn exact_value(&self, x: &DenseVector) -> f64 {
        x.iter().map(|v| v * v / (1.0 + v * v)).sum::<f64>() + 0.5 * self.tether * x.dot(x)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        DenseVector::from_vec_unchecked(
            x.iter()
                .map(|&v| {
                    let s = 1.0 + v * v;
                    2.0 * v / (s * s) + self.tether * v
                })
                .collect(),
        )
    }

    fn exact_hessian(&self, x: &DenseVector) -> DenseMatrix {
        let diag: Vec<f64> = x.iter().map(|&v| self.curvature(v)).collect();
        DenseMatrix::diagonal(&diag)
    }

    fn exact_hvp(&self, x: &DenseVector, v: &DenseVector) -> DenseVector {
        DenseVector::from_vec_unchecked(
            x.iter()
                .zip(v.iter())
                .map(|(&xi, &vi)| self.curvature(xi) * vi)
                .collect(),
        )
    }

    fn noisy_gradient(&self, x: &DenseVector, r: &mut RandomSource) -> Result<DenseVector> {
        check_point(x, self.dim, "noisy_gradient")?;
        additive_gradient(self.exact_gradient(x), &self.noise, r)
    }

    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        r: &mut RandomSource,
    ) -> Result<DenseVector> {
        check_point(x, self.dim, "noisy_hvp")?;
        check_point(v, self.dim, "noisy_hvp direction")?;
        additive_hvp(self.exact_hvp(x, v), v, &self.hessian_noise, r)
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants {
            smoothness: Some(2.0 + self.tether),
            f_star: Some(0.0),
            hessian_lipschitz: None,
        }
    }

    fn name(&self) -> &str {
        "wells"
    }
}

/// Noiseless cubic `F(x) = 0.5 ||x||^2 + (1/6) sum_i c_i x_i^3 + k x_0 x_1 x_2`.
/// Unbounded below and not globally smooth; it declares no constants.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicProblem {
    pub cubic: Vec<f64>,
    pub coupling: f64,
}

impl CubicProblem {
    pub fn new(cubic: Vec<f64>, coupling: f64) -> Result<Self> {
        if cubic.len() < 3 {
            return Err(contract("cubic problem needs dimension at least 3"));
        }
        Ok(Self { cubic, coupling })
    }
}

impl StochasticOracle for CubicProblem {
    fn dim(&self) -> usize {
        self.cubic.len()
    }

    fn exact_value(&self, x: &DenseVector) -> f64 {
        let cubic: f64 = x
            .iter()
            .zip(&self.cubic)
            .map(|(v, c)| c * v * v * v / 6.0)
            .sum();
        0.5 * x.dot(x) + cubic + self.coupling * x[0] * x[1] * x[2]
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        let mut g: Vec<f64> = x
            .iter()
            .zip(&self.cubic)
            .map(|(v, c)| v + 0.5 * c * v * v)
            .collect();
        g[0] += self.coupling * x[1] * x[2];
        g[1] += self.coupling * x[0] * x[2];
        g[2] += self.coupling * x[0] * x[1];
        DenseVector::from_vec_unchecked(g)
    }

    fn exact_hessian(&self, x: &DenseVector) -> DenseMatrix {
        let d = self.dim();
        let mut h = DenseMatrix::identity(d);
        for i in 0..d {
            h.set(i, i, 1.0 + self.cubic[i] * x[i]);
        }
        let k = self.coupling;
        for (i, j, l) in [(0, 1, 2), (0, 2, 1), (1, 2, 0)] {
            h.set(i, j, k * x[l]);
            h.set(j, i, k * x[l]);
        }
        h
    }

    fn noisy_gradient(&self, x: &DenseVector, _r: &mut RandomSource) -> Result<DenseVector> {
        check_point(x, self.dim(), "noisy_gradient")?;
        Ok(self.exact_gradient(x))
    }

    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        _r: &mut RandomSource,
    ) -> Result<DenseVector> {
        check_point(x, self.dim(), "noisy_hvp")?;
        check_point(v, self.dim(), "noisy_hvp direction")?;
        Ok(self.exact_hvp(x, v))
    }

    fn constants(&self) -> OracleConstants {
        OracleConstants::default()
    }

    fn name(&self) -> &str {
        "cubic"
    }
}

/// Central differences of `exact_value`, accurate to `O(h^2)`.
pub fn finite_difference_gradient(
    oracle: &dyn StochasticOracle,
    x: &DenseVector,
    h: f64,
) -> Result<DenseVector> {
    central_difference(|y| oracle.exact_value(y), x, h)
}

/// Central differences of `exact_gradient` along `v`.
pub fn finite_difference_hvp(
    oracle: &dyn StochasticOracle,
    x: &DenseVector,
    v: &DenseVector,
    h: f64,
) -> Result<DenseVector> {
    if !(h > 0.0) {
        return Err(contract(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let mut plus = x.clone();
    plus.axpy(h, v);
    let mut minus = x.clone();
    minus.axpy(-h, v);
    Ok((&oracle.exact_gradient(&plus) - &oracle.exact_gradient(&minus)).scaled(0.5 / h))
}

pub fn central_difference(
    f: impl Fn(&DenseVector) -> f64,
    x: &DenseVector,
    h: f64,
) -> Result<DenseVector> {
    if !(h > 0.0) {
        return Err(contract(format!(
            "difference step must be positive, got {h}"
        )));
    }
    let mut probe = x.clone().into_vec();
    let mut grad = Vec::with_capacity(probe.len());
    for i in 0..probe.len() {
        let orig = probe[i];
        probe[i] = orig + h;
        let up = f(&DenseVector::from_vec_unchecked(probe.clone()));
        probe[i] = orig - h;
        let down = f(&DenseVector::from_vec_unchecked(probe.clone()));
        probe[i] = orig;
        grad.push((up - down) / (2.0 * h));
    }
    Ok(DenseVector::from_vec_unchecked(grad))
}

/// Oracle wrapper that counts noisy queries.
pub struct CountingOracle<'a> {
    inner: &'a dyn StochasticOracle,
    gradient_queries: AtomicU64,
    hvp_queries: AtomicU64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(inner: &'a dyn StochasticOracle) -> Self {
        Self {
            inner,
            gradient_queries: AtomicU64::new(0),
            hvp_queries: AtomicU64::new(0),
        }
    }

    pub fn gradient_queries(&self) -> u64 {
        self.gradient_queries.load(Ordering::Relaxed)
    }

    pub fn hvp_queries(&self) -> u64 {
        self.hvp_queries.load(Ordering::Relaxed)
    }
}

impl StochasticOracle for CountingOracle<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn exact_value(&self, x: &DenseVector) -> f64 {
        self.inner.exact_value(x)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.inner.exact_gradient(x)
    }

    fn exact_hessian(&self, x: &DenseVector) -> DenseMatrix {
        self.inner.exact_hessian(x)
    }

    fn exact_hvp(&self, x: &DenseVector, v: &DenseVector) -> DenseVector {
        self.inner.exact_hvp(x, v)
    }

    fn noisy_gradient(&self, x: &DenseVector, r: &mut RandomSource) -> Result<DenseVector> {
        self.gradient_queries.fetch_add(1, Ordering::Relaxed);
        self.inner.noisy_gradient(x, r)
    }

    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        r: &mut RandomSource,
    ) -> Result<DenseVector> {
        self.hvp_queries.fetch_add(1, Ordering::Relaxed);
        self.inner.noisy_hvp(x, v, r)
    }

    fn constants(&self) -> OracleConstants {
        self.inner.constants()
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::median_of_means;

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::from_slice(xs).unwrap()
    }

    fn pareto_quadratic(dim: usize, p: f64) -> QuadraticProblem {
        QuadraticProblem::new(dim, TailSpec::pareto(p, 1.0), TailSpec::pareto(p, 1.0)).unwrap()
    }

    #[test]
    fn quadratic_exact_quantities() {
        let q = QuadraticProblem::noiseless(2);
        let x = v(&[1.0, 2.0]);
        assert_eq!(q.exact_value(&x), 2.5);
        assert_eq!(q.exact_gradient(&x), x);
        assert_eq!(q.exact_hessian(&x), DenseMatrix::identity(2));
        let c = q.constants();
        assert_eq!((c.smoothness, c.f_star), (Some(1.0), Some(0.0)));
    }

    #[test]
    fn noiseless_queries_are_exact() {
        let q = QuadraticProblem::noiseless(2);
        let mut r = RandomSource::new(0, 0);
        let x = v(&[1.0, 2.0]);
        assert_eq!(q.noisy_gradient(&x, &mut r).unwrap(), x);
        let dir = v(&[-3.0, 0.5]);
        assert_eq!(q.noisy_hvp(&x, &dir, &mut r).unwrap(), dir);
    }

    #[test]
    fn hvp_of_zero_direction_is_zero_under_noise() {
        let q = pareto_quadratic(4, 1.1);
        let mut r = RandomSource::new(3, 0);
        for _ in 0..100 {
            let hv = q
                .noisy_hvp(&v(&[1.0, 2.0, 3.0, 4.0]), &DenseVector::zeros(4), &mut r)
                .unwrap();
            assert!(hv.is_zero());
        }
    }

    #[test]
    fn queries_reject_bad_points() {
        let q = pareto_quadratic(3, 1.5);
        let mut r = RandomSource::new(0, 0);
        let err = q.noisy_gradient(&v(&[1.0, 2.0]), &mut r).unwrap_err();
        assert!(matches!(err, crate::error::Error::Contract(_)));
        let bad = DenseVector::from_vec_unchecked(vec![f64::NAN, 0.0, 0.0]);
        assert!(q.noisy_gradient(&bad, &mut r).is_err());
        assert!(q
            .noisy_hvp(&v(&[0.0, 0.0, 0.0]), &v(&[1.0]), &mut r)
            .is_err());
    }

    #[test]
    fn noisy_gradient_fixture() {
        let q = QuadraticProblem::new(3, TailSpec::pareto(1.1, 1.0), TailSpec::none()).unwrap();
        let mut r = RandomSource::new(99, 2);
        let g = q.noisy_gradient(&v(&[1.0, 0.0, -1.0]), &mut r).unwrap();
        assert_eq!(g.as_slice(), &GRADIENT_FIXTURE);
    }

    const GRADIENT_FIXTURE: [f64; 3] = [3.507520040750363, 1.3655671019471889, 0.8747131952760785];

    #[test]
    fn noisy_gradient_is_unbiased() {
        let dim = 10;
        let q = pareto_quadratic(dim, 1.1);
        let x = DenseVector::basis(dim, 0);
        let n = 100_000;
        let mut coords = vec![Vec::with_capacity(n); dim];
        for seed in 0..n as u64 {
            let mut r = RandomSource::new(seed, 17);
            let g = q.noisy_gradient(&x, &mut r).unwrap();
            for (c, gi) in coords.iter_mut().zip(g.iter()) {
                c.push(*gi);
            }
        }
        for (i, c) in coords.iter().enumerate() {
            let m = median_of_means(c, 100).unwrap();
            assert!(
                (m.estimate - x[i]).abs() <= 3.0 * m.std_error,
                "coord {i}: {m:?}"
            );
        }
    }

    #[test]
    fn noisy_hvp_is_unbiased() {
        let dim = 5;
        let q = pareto_quadratic(dim, 1.5);
        let x = DenseVector::zeros(dim);
        let dir = v(&[1.0, -2.0, 0.5, 0.0, 3.0]);
        let n = 100_000;
        let mut coords = vec![Vec::with_capacity(n); dim];
        let mut r = RandomSource::new(5, 0);
        for _ in 0..n {
            let hv = q.noisy_hvp(&x, &dir, &mut r).unwrap();
            for (c, hi) in coords.iter_mut().zip(hv.iter()) {
                c.push(*hi);
            }
        }
        for (i, c) in coords.iter().enumerate() {
            let m = median_of_means(c, 100).unwrap();
            assert!(
                (m.estimate - dir[i]).abs() <= 3.0 * m.std_error,
                "coord {i}: {m:?}"
            );
        }
    }

    #[test]
    fn finite_difference_examples() {
        let q = QuadraticProblem::noiseless(2);
        let x = v(&[1.0, 2.0]);
        let fd = finite_difference_gradient(&q, &x, 1e-5).unwrap();
        assert!((&fd - &x).norm() < 1e-8);
        let constant = central_difference(|_| 3.5, &x, 1e-3).unwrap();
        assert!(constant.is_zero());
        assert!(finite_difference_gradient(&q, &x, 0.0).is_err());
    }

    #[test]
    fn wells_derivatives_match_finite_differences() {
        let w = WellsProblem::new(4, 0.1, TailSpec::none(), TailSpec::none()).unwrap();
        let mut r = RandomSource::new(8, 0);
        for _ in 0..50 {
            let x = r.standard_normal_vector(4).scaled(2.0);
            let fd = finite_difference_gradient(&w, &x, 1e-5).unwrap();
            assert!((&fd - &w.exact_gradient(&x)).norm() < 1e-8);
            let dir = r.standard_normal_vector(4);
            let fh = finite_difference_hvp(&w, &x, &dir, 1e-5).unwrap();
            assert!((&fh - &w.exact_hvp(&x, &dir)).norm() < 1e-7);
            assert!(w.exact_value(&x) >= 0.0);
        }
    }

    #[test]
    fn wells_is_nonconvex_and_smooth() {
        let w = WellsProblem::new(2, 0.1, TailSpec::none(), TailSpec::none()).unwrap();
        let h = w.exact_hessian(&v(&[1.0, 0.0]));
        assert!(h.get(0, 0) < 0.0);
        let l = w.constants().smoothness.unwrap();
        let mut r = RandomSource::new(9, 0);
        for _ in 0..1000 {
            let a = r.standard_normal_vector(2).scaled(3.0);
            let b = r.standard_normal_vector(2).scaled(3.0);
            let lhs = (&w.exact_gradient(&a) - &w.exact_gradient(&b)).norm();
            assert!(lhs <= l * (&a - &b).norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn quadratic_gradient_is_lipschitz() {
        let q = QuadraticProblem::noiseless(10);
        let mut r = RandomSource::new(10, 0);
        for _ in 0..1000 {
            let a = r.standard_normal_vector(10);
            let b = r.standard_normal_vector(10);
            let lhs = (&q.exact_gradient(&a) - &q.exact_gradient(&b)).norm();
            assert!(lhs <= (&a - &b).norm() * (1.0 + 1e-12));
            assert!(q.exact_value(&a) >= 0.0);
        }
    }

    #[test]
    fn cubic_derivatives_match_finite_differences() {
        let c = CubicProblem::new(vec![0.7, -1.2, 0.4, 2.0], 0.9).unwrap();
        let mut r = RandomSource::new(12, 0);
        for _ in 0..20 {
            let x = r.standard_normal_vector(4);
            let fd = finite_difference_gradient(&c, &x, 1e-5).unwrap();
            assert!((&fd - &c.exact_gradient(&x)).norm() < 1e-8);
            let dir = r.standard_normal_vector(4);
            let fh = finite_difference_hvp(&c, &x, &dir, 1e-5).unwrap();
            assert!((&fh - &c.exact_hvp(&x, &dir)).norm() < 1e-8);
        }
    }

    #[test]
    fn counting_oracle_counts() {
        let q = pareto_quadratic(2, 1.5);
        let c = CountingOracle::new(&q);
        let mut r = RandomSource::new(0, 0);
        let x = v(&[0.0, 1.0]);
        for _ in 0..3 {
            c.noisy_gradient(&x, &mut r).unwrap();
        }
        c.noisy_hvp(&x, &x, &mut r).unwrap();
        assert_eq!((c.gradient_queries(), c.hvp_queries()), (3, 1));
    }
}

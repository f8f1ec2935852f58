//! Chain-structured hard instance for zero-respecting methods, its rescaling,
//! and the Bernoulli zero-chain derivative oracle.

use serde::{Deserialize, Serialize};

use crate::error::{config, contract, Result};
use crate::numerics::{DenseMatrix, DenseVector, RandomSource};
use crate::problems::{OracleConstants, StochasticOracle};

/// Value gap per coordinate: `h(0) - inf h <= DELTA_0 * T`.
pub const DELTA_0: f64 = 12.0;
/// Gradient-norm bound of a single chain link.
pub const ELL_0: f64 = 23.0;
/// Grid estimate of the Hessian operator-norm bound (Gershgorin over sup norms of
/// the link factors: 2 sup|Psi'| sup|Phi'| + sup Psi sup|Phi''| + sup|Psi''| sup Phi).
pub const ELL_1_ESTIMATE: f64 = 152.0;
/// Grid estimate of the third-derivative bound, from the same sup norms.
pub const ELL_2_ESTIMATE: f64 = 2244.0;

const SQRT_E: f64 = 1.648_721_270_700_128_2;

pub fn psi(x: f64) -> f64 {
    if x <= 0.5 {
        return 0.0;
    }
    let u = 2.0 * x - 1.0;
    (1.0 - 1.0 / (u * u)).exp()
}

fn psi_derivs(x: f64) -> (f64, f64, f64) {
    let p = psi(x);
    if p == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = 2.0 * x - 1.0;
    let (u2, u3) = (u * u, u * u * u);
    let d1 = 4.0 * p / u3;
    let d2 = p * (16.0 / (u3 * u3) - 24.0 / (u2 * u2));
    (p, d1, d2)
}

/// `sqrt(e) * integral_{-inf}^x exp(-t^2/2) dt`, through the error function.
pub fn phi(x: f64) -> f64 {
    SQRT_E * (std::f64::consts::PI / 2.0).sqrt() * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

fn phi_derivs(x: f64) -> (f64, f64, f64) {
    let d1 = SQRT_E * (-0.5 * x * x).exp();
    (phi(x), d1, -x * d1)
}

/// `phi` by composite Simpson quadrature of its defining integral on `[-40, x]`.
pub fn phi_by_quadrature(x: f64) -> f64 {
    let a = -40.0f64;
    if x <= a {
        return 0.0;
    }
    let n = 2 * ((x - a) * 2000.0).ceil() as usize;
    let h = (x - a) / n as f64;
    let f = |t: f64| (-0.5 * t * t).exp();
    let mut s = f(a) + f(x);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    SQRT_E * s * h / 3.0
}

/// Largest 1-based index `i` with `|x_i| > threshold`, or 0.
pub fn prog(x: &[f64], threshold: f64) -> usize {
    x.iter()
        .rposition(|v| v.abs() > threshold)
        .map_or(0, |i| i + 1)
}

/// `h*(x) = nu h(beta x)` on `R^{t_dim}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainFunction {
    pub t_dim: usize,
    pub nu: f64,
    pub beta: f64,
}

impl ChainFunction {
    pub fn new(t_dim: usize, nu: f64, beta: f64) -> Result<Self> {
        if t_dim < 1 {
            return Err(contract("chain length must be at least 1"));
        }
        if !(nu > 0.0 && beta > 0.0) {
            return Err(contract(format!(
                "nu and beta must be positive, got {nu}, {beta}"
            )));
        }
        Ok(Self { t_dim, nu, beta })
    }

    /// The unscaled chain `h`.
    pub fn unscaled(t_dim: usize) -> Result<Self> {
        Self::new(t_dim, 1.0, 1.0)
    }

    fn scaled_point(&self, x: &DenseVector) -> Result<Vec<f64>> {
        x.check_dim(self.t_dim, "chain argument")?;
        Ok(x.iter().map(|v| self.beta * v).collect())
    }

    pub fn value(&self, x: &DenseVector) -> Result<f64> {
        let y = self.scaled_point(x)?;
        Ok(self.nu * raw_value(&y))
    }

    pub fn gradient(&self, x: &DenseVector) -> Result<DenseVector> {
        let y = self.scaled_point(x)?;
        let s = self.nu * self.beta;
        Ok(DenseVector::from_vec_unchecked(
            raw_gradient(&y).into_iter().map(|g| s * g).collect(),
        ))
    }

    pub fn hessian(&self, x: &DenseVector) -> Result<DenseMatrix> {
        let y = self.scaled_point(x)?;
        let s = self.nu * self.beta * self.beta;
        let (diag, off) = raw_hessian_bands(&y);
        let mut h = DenseMatrix::zeros(self.t_dim);
        for j in 0..self.t_dim {
            h.set(j, j, s * diag[j]);
            if j + 1 < self.t_dim {
                h.set(j, j + 1, s * off[j]);
                h.set(j + 1, j, s * off[j]);
            }
        }
        Ok(h)
    }

    pub fn hvp(&self, x: &DenseVector, v: &DenseVector) -> Result<DenseVector> {
        let y = self.scaled_point(x)?;
        v.check_dim(self.t_dim, "hvp direction")?;
        let s = self.nu * self.beta * self.beta;
        let (diag, off) = raw_hessian_bands(&y);
        let n = self.t_dim;
        let out = (0..n)
            .map(|j| {
                let mut acc = diag[j] * v[j];
                if j > 0 {
                    acc += off[j - 1] * v[j - 1];
                }
                if j + 1 < n {
                    acc += off[j] * v[j + 1];
                }
                s * acc
            })
            .collect();
        Ok(DenseVector::from_vec_unchecked(out))
    }
}

fn raw_value(y: &[f64]) -> f64 {
    let mut v = -psi(1.0) * phi(y[0]);
    for i in 1..y.len() {
        v += psi(-y[i - 1]) * phi(-y[i]) - psi(y[i - 1]) * phi(y[i]);
    }
    v
}

fn raw_gradient(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut g = vec![0.0; n];
    g[0] = -psi(1.0) * phi_derivs(y[0]).1;
    for i in 1..n {
        let (pm, dpm, _) = psi_derivs(-y[i - 1]);
        let (pp, dpp, _) = psi_derivs(y[i - 1]);
        let (fm, dfm, _) = phi_derivs(-y[i]);
        let (fp, dfp, _) = phi_derivs(y[i]);
        // term i: Psi(-y_{i-1}) Phi(-y_i) - Psi(y_{i-1}) Phi(y_i)
        g[i] += -pm * dfm - pp * dfp;
        g[i - 1] += -dpm * fm - dpp * fp;
    }
    g
}

/// Diagonal and superdiagonal of the tridiagonal Hessian of `h`.
fn raw_hessian_bands(y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    diag[0] = -psi(1.0) * phi_derivs(y[0]).2;
    for i in 1..n {
        let (pm, dpm, d2pm) = psi_derivs(-y[i - 1]);
        let (pp, dpp, d2pp) = psi_derivs(y[i - 1]);
        let (fm, dfm, d2fm) = phi_derivs(-y[i]);
        let (fp, dfp, d2fp) = phi_derivs(y[i]);
        diag[i] += pm * d2fm - pp * d2fp;
        diag[i - 1] += d2pm * fm - d2pp * fp;
        off[i - 1] += dpm * dfm - dpp * dfp;
    }
    (diag, off)
}

/// Derivative oracle that reveals coordinates beyond `prog_{1/4}(beta x)` only
/// with probability `rho`, scaled by `1/rho` so it stays unbiased.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroChainOracle {
    pub chain: ChainFunction,
    pub rho: f64,
    /// Highest derivative order served, 1 or 2.
    pub order: u8,
}

impl ZeroChainOracle {
    pub fn new(chain: ChainFunction, rho: f64, order: u8) -> Result<Self> {
        if !(rho > 0.0 && rho <= 1.0) {
            return Err(contract(format!("rho must lie in (0, 1], got {rho}")));
        }
        if !(1..=2).contains(&order) {
            return Err(contract(format!(
                "oracle order must be 1 or 2, got {order}"
            )));
        }
        Ok(Self { chain, rho, order })
    }

    fn mask(&self, x: &DenseVector, v: DenseVector, reveal: bool) -> DenseVector {
        let y: Vec<f64> = x.iter().map(|xi| self.chain.beta * xi).collect();
        let k = prog(&y, 0.25);
        let scale = if reveal { 1.0 / self.rho } else { 0.0 };
        let mut out = v.into_vec();
        for o in out.iter_mut().skip(k) {
            *o *= scale;
        }
        DenseVector::from_vec_unchecked(out)
    }

    /// One query: a single Bernoulli draw shared by the gradient estimate and,
    /// when `v` is given, the Hessian-vector estimate.
    pub fn zero_chain_query(
        &self,
        x: &DenseVector,
        v: Option<&DenseVector>,
        r: &mut RandomSource,
    ) -> Result<(DenseVector, Option<DenseVector>)> {
        x.check_finite("zero-chain query")?;
        if v.is_some() && self.order < 2 {
            return Err(contract(
                "first-order zero-chain oracle cannot serve Hessian products",
            ));
        }
        let reveal = r.bernoulli(self.rho);
        let g = self.mask(x, self.chain.gradient(x)?, reveal);
        let hv = match v {
            Some(v) => Some(self.mask(x, self.chain.hvp(x, v)?, reveal)),
            None => None,
        };
        Ok((g, hv))
    }
}

impl StochasticOracle for ZeroChainOracle {
    fn dim(&self) -> usize {
        self.chain.t_dim
    }

    fn exact_value(&self, x: &DenseVector) -> f64 {
        self.chain.value(x).unwrap_or(f64::NAN)
    }

    fn exact_gradient(&self, x: &DenseVector) -> DenseVector {
        self.chain.gradient(x).expect("dimension checked by caller")
    }

    fn exact_hessian(&self, x: &DenseVector) -> DenseMatrix {
        self.chain.hessian(x).expect("dimension checked by caller")
    }

    fn exact_hvp(&self, x: &DenseVector, v: &DenseVector) -> DenseVector {
        self.chain.hvp(x, v).expect("dimension checked by caller")
    }

    fn noisy_gradient(&self, x: &DenseVector, r: &mut RandomSource) -> Result<DenseVector> {
        x.check_dim(self.chain.t_dim, "noisy_gradient")?;
        Ok(self.zero_chain_query(x, None, r)?.0)
    }

    fn noisy_hvp(
        &self,
        x: &DenseVector,
        v: &DenseVector,
        r: &mut RandomSource,
    ) -> Result<DenseVector> {
        x.check_dim(self.chain.t_dim, "noisy_hvp")?;
        v.check_dim(self.chain.t_dim, "noisy_hvp direction")?;
        let (_, hv) = self.zero_chain_query(x, Some(v), r)?;
        Ok(hv.expect("direction supplied"))
    }

    fn constants(&self) -> OracleConstants {
        let c = &self.chain;
        OracleConstants {
            smoothness: Some(c.nu * c.beta * c.beta * ELL_1_ESTIMATE),
            f_star: Some(c.nu * (-phi(0.0) - DELTA_0 * c.t_dim as f64)),
            hessian_lipschitz: Some(c.nu * c.beta.powi(3) * ELL_2_ESTIMATE),
        }
    }

    fn name(&self) -> &str {
        "zero-chain"
    }
}

/// Problem class the instance is scaled to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HardInstanceTarget {
    /// Initial gap `Delta`.
    pub delta: f64,
    /// Gradient Lipschitz constant `L_1`.
    pub l1: f64,
    /// Hessian Lipschitz constant `L_2`; `None` for no second-order smoothness.
    pub l2: Option<f64>,
    /// Gradient noise level `sigma_1`.
    pub sigma1: f64,
    /// Hessian noise level `sigma_2`; `None` for a first-order oracle.
    pub sigma2: Option<f64>,
    pub epsilon: f64,
    pub p: f64,
    pub ell1: f64,
    pub ell2: f64,
}

impl HardInstanceTarget {
    pub fn new(delta: f64, l1: f64, sigma1: f64, epsilon: f64, p: f64) -> Self {
        Self {
            delta,
            l1,
            l2: None,
            sigma1,
            sigma2: None,
            epsilon,
            p,
            ell1: ELL_1_ESTIMATE,
            ell2: ELL_2_ESTIMATE,
        }
    }
}

/// `rho = min{(eps/sigma_1)^{p/(p-1)} 2^{(p+1)/(p-1)} ell_0^{p/(p-1)}, 1}`.
pub fn zero_chain_rho(epsilon: f64, sigma1: f64, p: f64) -> f64 {
    let e = p / (p - 1.0);
    ((epsilon / sigma1).powf(e) * 2f64.powf((p + 1.0) / (p - 1.0)) * ELL_0.powf(e)).min(1.0)
}

/// Scale the chain so it belongs to the target class and every point reached
/// before the last coordinate is revealed has gradient norm above `2 eps`.
pub fn rescale_for_target(target: &HardInstanceTarget) -> Result<ZeroChainOracle> {
    let t = target;
    for (name, v) in [
        ("delta", t.delta),
        ("L1", t.l1),
        ("sigma1", t.sigma1),
        ("epsilon", t.epsilon),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(contract(format!("{name} must be positive, got {v}")));
        }
    }
    if !(t.p > 1.0 && t.p <= 2.0) {
        return Err(contract(format!(
            "moment order p must lie in (1, 2], got {}",
            t.p
        )));
    }
    let mut beta = t.l1 / (2.0 * t.epsilon * t.ell1);
    let mut order = 1;
    if let Some(s2) = t.sigma2 {
        order = 2;
        beta = beta.min(ELL_0 * s2 / (t.ell1 * t.sigma1));
        if let Some(l2) = t.l2 {
            beta = beta.min((l2 / (2.0 * t.epsilon * t.ell2)).sqrt());
        }
    }
    let nu = 2.0 * t.epsilon / beta;
    let rho = zero_chain_rho(t.epsilon, t.sigma1, t.p);
    let t_dim = (t.delta * beta / (2.0 * DELTA_0 * t.epsilon)).floor();
    if t_dim < 1.0 {
        return Err(config(format!(
            "instance infeasible: chain length floor(Delta beta / (2 Delta_0 eps)) = {t_dim} < 1 \
             (Delta={}, beta={beta:.4e}, eps={})",
            t.delta, t.epsilon
        )));
    }
    ZeroChainOracle::new(ChainFunction::new(t_dim as usize, nu, beta)?, rho, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::median_of_means;
    use crate::problems::{finite_difference_gradient, finite_difference_hvp};

    fn v(xs: &[f64]) -> DenseVector {
        DenseVector::from_slice(xs).unwrap()
    }

    fn random_point(r: &mut RandomSource, d: usize, spread: f64) -> DenseVector {
        DenseVector::from_vec_unchecked(
            (0..d)
                .map(|_| spread * (2.0 * r.uniform_unit() - 1.0))
                .collect(),
        )
    }

    #[test]
    fn psi_and_phi_values() {
        assert_eq!(psi(0.5), 0.0);
        assert_eq!(psi(0.0), 0.0);
        assert_eq!(psi(-3.0), 0.0);
        assert_eq!(psi(1.0), 1.0);
        assert!((phi(0.0) - 2.0664).abs() < 1e-4);
        assert!((phi(0.0) - SQRT_E * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-15);
        assert!((SQRT_E - 0.5f64.exp()).abs() < 1e-15);
    }

    #[test]
    fn phi_matches_quadrature() {
        for x in [-3.0, -1.0, 0.0, 0.3, 1.0, 2.5] {
            assert!((phi(x) - phi_by_quadrature(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn psi_is_smooth_at_threshold() {
        for x in [0.5 + 1e-3, 0.5 + 1e-2, 0.55] {
            let (p, d1, d2) = psi_derivs(x);
            assert!(
                p < 1e-10 && d1.abs() < 1e-6 && d2.abs() < 1e-3,
                "x={x}: {p} {d1} {d2}"
            );
        }
    }

    #[test]
    fn psi_derivatives_match_finite_differences() {
        for x in [0.6, 0.8, 1.0, 1.7, 4.0] {
            let h = 1e-6;
            let (_, d1, d2) = psi_derivs(x);
            assert!(((psi(x + h) - psi(x - h)) / (2.0 * h) - d1).abs() < 1e-6);
            assert!(((psi_derivs(x + h).1 - psi_derivs(x - h).1) / (2.0 * h) - d2).abs() < 1e-5);
        }
    }

    #[test]
    fn chain_value_at_origin() {
        let c = ChainFunction::unscaled(5).unwrap();
        let h0 = c.value(&DenseVector::zeros(5)).unwrap();
        assert_eq!(h0, -phi(0.0));
        assert!((h0 - (-phi_by_quadrature(0.0))).abs() < 1e-10);
        assert!(c.value(&DenseVector::zeros(4)).is_err());
    }

    #[test]
    fn chain_gradient_at_origin() {
        let c = ChainFunction::unscaled(6).unwrap();
        let g = c.gradient(&DenseVector::zeros(6)).unwrap();
        assert!((g[0] + SQRT_E).abs() < 1e-15);
        assert!(g.iter().skip(1).all(|&x| x == 0.0));
    }

    #[test]
    fn scaled_chain_is_rescaled_h() {
        let c = ChainFunction::new(4, 2.0, 3.0).unwrap();
        let u = ChainFunction::unscaled(4).unwrap();
        let mut r = RandomSource::new(4, 0);
        for _ in 0..20 {
            let x = random_point(&mut r, 4, 0.5);
            assert!((c.value(&x).unwrap() - 2.0 * u.value(&x.scaled(3.0)).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn value_decreases_along_first_coordinate() {
        let c = ChainFunction::unscaled(3).unwrap();
        let mut prev = c.value(&DenseVector::zeros(3)).unwrap();
        for k in 1..=10 {
            let x = v(&[0.1 * k as f64, 0.0, 0.0]);
            let val = c.value(&x).unwrap();
            assert!(val < prev);
            prev = val;
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let o = ZeroChainOracle::new(ChainFunction::new(8, 0.7, 1.3).unwrap(), 1.0, 2).unwrap();
        let mut r = RandomSource::new(8, 8);
        for _ in 0..100 {
            let x = random_point(&mut r, 8, 1.5);
            let g = o.exact_gradient(&x);
            let fd = finite_difference_gradient(&o, &x, 1e-6).unwrap();
            assert!((&fd - &g).norm() <= 1e-6 * g.norm().max(1.0));
            let dir = r.standard_normal_vector(8);
            let hv = o.exact_hvp(&x, &dir);
            let fh = finite_difference_hvp(&o, &x, &dir, 1e-6).unwrap();
            assert!((&fh - &hv).norm() <= 1e-6 * hv.norm().max(1.0));
            assert_eq!(
                o.exact_hessian(&x).matvec(&dir).unwrap().as_slice().len(),
                8
            );
            assert!(
                (&o.exact_hessian(&x).matvec(&dir).unwrap() - &hv).norm()
                    < 1e-10 * hv.norm().max(1.0)
            );
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let c = ChainFunction::unscaled(8).unwrap();
        let mut r = RandomSource::new(2, 2);
        for _ in 0..100 {
            let x = random_point(&mut r, 8, 1.5);
            let (a, b) = (r.standard_normal_vector(8), r.standard_normal_vector(8));
            let lhs = a.dot(&c.hvp(&x, &b).unwrap());
            let rhs = b.dot(&c.hvp(&x, &a).unwrap());
            assert!((lhs - rhs).abs() < 1e-10);
            assert!(c.hessian(&x).unwrap().is_symmetric());
        }
    }

    #[test]
    fn gradient_is_lipschitz_with_estimate() {
        let c = ChainFunction::unscaled(6).unwrap();
        let mut r = RandomSource::new(3, 3);
        for _ in 0..1000 {
            let x = random_point(&mut r, 6, 2.0);
            let y = &x + &random_point(&mut r, 6, 0.2);
            let lhs = (&c.gradient(&x).unwrap() - &c.gradient(&y).unwrap()).norm();
            assert!(lhs <= ELL_1_ESTIMATE * (&x - &y).norm());
        }
    }

    #[test]
    fn value_gap_bounded_by_delta_0() {
        let c = ChainFunction::unscaled(5).unwrap();
        let h0 = c.value(&DenseVector::zeros(5)).unwrap();
        let mut r = RandomSource::new(5, 5);
        for _ in 0..20_000 {
            let x = random_point(&mut r, 5, 4.0);
            assert!(h0 - c.value(&x).unwrap() <= DELTA_0 * 5.0);
        }
    }

    #[test]
    fn large_gradient_before_last_coordinate() {
        let c = ChainFunction::unscaled(6).unwrap();
        let mut r = RandomSource::new(6, 6);
        let mut checked = 0;
        for _ in 0..20_000 {
            let x = random_point(&mut r, 6, 2.0);
            if prog(x.as_slice(), 1.0) < 6 {
                assert!(c.gradient(&x).unwrap().norm() > 1.0, "{x:?}");
                checked += 1;
            }
        }
        assert!(checked > 10_000);
    }

    #[test]
    fn prog_examples() {
        assert_eq!(prog(&[0.0; 4], 0.25), 0);
        assert_eq!(prog(&[0.3, 0.1, 0.5], 0.25), 3);
        assert_eq!(prog(&[0.3, 0.1, 0.2], 0.25), 1);
        assert_eq!(prog(&[0.25, -0.26], 0.25), 2);
    }

    #[test]
    fn unit_rho_is_exact() {
        let o = ZeroChainOracle::new(ChainFunction::unscaled(5).unwrap(), 1.0, 2).unwrap();
        let mut r = RandomSource::new(1, 1);
        let x = v(&[1.0, 0.7, 0.1, 0.0, 0.0]);
        let d = v(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        for _ in 0..10 {
            let (g, hv) = o.zero_chain_query(&x, Some(&d), &mut r).unwrap();
            assert_eq!(g, o.exact_gradient(&x));
            assert_eq!(hv.unwrap(), o.exact_hvp(&x, &d));
        }
    }

    #[test]
    fn first_order_oracle_refuses_hvp() {
        let o = ZeroChainOracle::new(ChainFunction::unscaled(3).unwrap(), 0.5, 1).unwrap();
        let x = DenseVector::zeros(3);
        assert!(o
            .zero_chain_query(&x, Some(&x), &mut RandomSource::new(0, 0))
            .is_err());
        assert!(ZeroChainOracle::new(ChainFunction::unscaled(3).unwrap(), 0.0, 1).is_err());
        assert!(ZeroChainOracle::new(ChainFunction::unscaled(3).unwrap(), 0.5, 3).is_err());
    }

    #[test]
    fn estimator_is_unbiased() {
        let o = ZeroChainOracle::new(ChainFunction::unscaled(4).unwrap(), 0.3, 2).unwrap();
        let x = v(&[1.0, 0.8, 0.2, 0.0]);
        let exact = o.exact_gradient(&x);
        let n = 100_000;
        let mut coords = vec![Vec::with_capacity(n); 4];
        let mut r = RandomSource::new(10, 0);
        for _ in 0..n {
            let g = o.noisy_gradient(&x, &mut r).unwrap();
            for (c, gi) in coords.iter_mut().zip(g.iter()) {
                c.push(*gi);
            }
        }
        for (i, c) in coords.iter().enumerate() {
            let m = median_of_means(c, 100).unwrap();
            assert!(
                (m.estimate - exact[i]).abs() <= 3.0 * m.std_error + 1e-12,
                "coord {i}: {m:?} vs {}",
                exact[i]
            );
        }
    }

    #[test]
    fn reveal_frequency_matches_rho() {
        for (rho, k) in [(0.1, 2), (0.5, 1), (0.03, 4)] {
            let o = ZeroChainOracle::new(ChainFunction::unscaled(6).unwrap(), rho, 1).unwrap();
            let mut x = vec![0.0; 6];
            x[..k].fill(1.0);
            let x = v(&x);
            assert_eq!(prog(x.as_slice(), 0.25), k);
            let n = 10_000;
            let mut r = RandomSource::new(99, k as u64);
            let revealed = (0..n)
                .filter(|_| o.noisy_gradient(&x, &mut r).unwrap()[k] != 0.0)
                .count();
            let freq = revealed as f64 / n as f64;
            assert!(
                (freq - rho).abs() <= 3.0 * (rho * (1.0 - rho) / n as f64).sqrt(),
                "rho={rho}: {freq}"
            );
        }
    }

    #[test]
    fn support_stays_within_progress_plus_one() {
        let o = ZeroChainOracle::new(ChainFunction::unscaled(8).unwrap(), 0.5, 2).unwrap();
        let mut r = RandomSource::new(12, 0);
        for _ in 0..2000 {
            let mut x = random_point(&mut r, 8, 1.5).into_vec();
            let cut = (r.uniform_unit() * 8.0) as usize;
            for xi in x.iter_mut().skip(cut) {
                *xi = 0.2 * (2.0 * r.uniform_unit() - 1.0);
            }
            let x = v(&x);
            let k = prog(x.as_slice(), 0.25);
            let d = r.standard_normal_vector(8);
            let (g, hv) = o.zero_chain_query(&x, Some(&d), &mut r).unwrap();
            assert!(g.support().iter().all(|&i| i < k + 1));
            assert!(hv.unwrap().support().iter().all(|&i| i < k + 1));
        }
    }

    #[test]
    fn rescaling_formulas() {
        let t = HardInstanceTarget::new(1000.0, 1.0, 1.0, 0.01, 1.5);
        let o = rescale_for_target(&t).unwrap();
        let beta = 1.0 / (2.0 * 0.01 * ELL_1_ESTIMATE);
        assert!((o.chain.beta - beta).abs() < 1e-15);
        assert!((o.chain.nu - 0.02 / beta).abs() < 1e-15);
        assert_eq!(
            o.chain.t_dim,
            (1000.0 * beta / (24.0 * 0.01)).floor() as usize
        );
        let rho = (0.01f64).powf(3.0) * 2f64.powf(5.0) * 23f64.powf(3.0);
        assert!((o.rho - rho).abs() < 1e-15);
        assert_eq!(o.order, 1);
        // nu beta = 2 eps, so the origin is not eps-stationary
        let g0 = o.exact_gradient(&DenseVector::zeros(o.chain.t_dim)).norm();
        assert!(g0 >= 2.0 * 0.01);
    }

    #[test]
    fn rescaling_doubles_length_with_gap() {
        let t = HardInstanceTarget::new(1000.0, 1.0, 1.0, 0.01, 2.0);
        let a = rescale_for_target(&t).unwrap().chain.t_dim as f64;
        let b = rescale_for_target(&HardInstanceTarget { delta: 2000.0, ..t })
            .unwrap()
            .chain
            .t_dim as f64;
        assert!((b - 2.0 * a).abs() <= 1.0);
    }

    #[test]
    fn rescaling_second_order_and_clamps() {
        let mut t = HardInstanceTarget::new(1000.0, 1.0, 1.0, 0.01, 2.0);
        t.sigma2 = Some(0.1);
        t.l2 = Some(1.0);
        let o = rescale_for_target(&t).unwrap();
        let beta = (1.0 / (0.02 * ELL_1_ESTIMATE))
            .min(ELL_0 * 0.1 / ELL_1_ESTIMATE)
            .min((1.0 / (0.02 * ELL_2_ESTIMATE)).sqrt());
        assert_eq!(o.chain.beta, beta);
        assert_eq!(o.order, 2);
        let loud = rescale_for_target(&HardInstanceTarget { sigma1: 1e-6, ..t }).unwrap();
        assert_eq!(loud.rho, 1.0);
        let err = rescale_for_target(&HardInstanceTarget { delta: 1e-6, ..t }).unwrap_err();
        assert!(err.to_string().contains("chain length"));
    }
}

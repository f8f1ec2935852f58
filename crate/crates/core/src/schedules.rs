//! Closed-form stepsize, momentum, batch and clipping parameters.

use serde::{Deserialize, Serialize};

use crate::clipping::ClipLevels;
use crate::error::{config, contract, Result};

/// Constants a schedule is computed from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Initial suboptimality `F(x0) - F*`.
    pub delta: f64,
    pub l: f64,
    pub sigma: f64,
    pub sigma_h: f64,
    /// Noise moment order, in `(1, 2]`.
    pub p: f64,
    pub epsilon: f64,
    pub t: u64,
    /// Failure probability of high-probability bounds.
    pub delta_prob: f64,
    /// Hessian Lipschitz constant, when declared.
    pub l_h: Option<f64>,
}

impl ProblemConstants {
    pub fn new(delta: f64, l: f64, sigma: f64, sigma_h: f64, p: f64, t: u64) -> Self {
        Self {
            delta,
            l,
            sigma,
            sigma_h,
            p,
            epsilon: 1.0,
            t,
            delta_prob: 0.1,
            l_h: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0 && self.p <= 2.0) {
            return Err(contract(format!(
                "moment order p must lie in (1, 2], got {}",
                self.p
            )));
        }
        for (name, v) in [
            ("delta", self.delta),
            ("sigma", self.sigma),
            ("sigma_h", self.sigma_h),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(contract(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(contract(format!(
                "smoothness L must be positive, got {}",
                self.l
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(contract(format!(
                "target epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.t < 1 {
            return Err(contract("horizon T must be at least 1"));
        }
        if !(self.delta_prob > 0.0 && self.delta_prob <= 1.0) {
            return Err(contract(format!(
                "confidence delta must lie in (0, 1], got {}",
                self.delta_prob
            )));
        }
        Ok(())
    }
}

/// How the initial momentum `g0` is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G0Init {
    /// Average of `B` noisy gradients at `x0`.
    Batch(u64),
    /// The exact gradient at `x0`.
    Exact,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Thm2,
    Thm3,
    /// High-probability exponents with `gamma = c * alpha` in place of the constant-laden minimum.
    Thm3Shape,
    ClipNsgdmBaseline,
    Manual,
}

impl Provenance {
    pub fn label(&self) -> &'static str {
        match self {
            Provenance::Thm2 => "thm2",
            Provenance::Thm3 => "thm3",
            Provenance::Thm3Shape => "thm3-shape",
            Provenance::ClipNsgdmBaseline => "clip-nsgdm-baseline",
            Provenance::Manual => "manual",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub gamma: f64,
    pub alpha: f64,
    pub g0: G0Init,
    pub lambda: Option<f64>,
    pub lambda_h_bar: Option<f64>,
    pub provenance: Provenance,
}

impl Schedule {
    pub fn manual(gamma: f64, alpha: f64) -> Result<Self> {
        let s = Self {
            gamma,
            alpha,
            g0: G0Init::Batch(1),
            lambda: None,
            lambda_h_bar: None,
            provenance: Provenance::Manual,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_clipping(mut self, lambda: f64, lambda_h_bar: f64) -> Result<Self> {
        ClipLevels::new(lambda, lambda_h_bar)?;
        self.lambda = Some(lambda);
        self.lambda_h_bar = Some(lambda_h_bar);
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(contract(format!(
                "clip level must be positive, got {lambda}"
            )));
        }
        self.lambda = Some(lambda);
        Ok(self)
    }

    pub fn with_g0(mut self, g0: G0Init) -> Self {
        self.g0 = g0;
        self
    }

    /// Number of gradient samples spent on `g0`.
    pub fn b_init(&self) -> u64 {
        match self.g0 {
            G0Init::Batch(b) => b,
            _ => 0,
        }
    }

    pub fn clip_levels(&self) -> Option<ClipLevels> {
        Some(ClipLevels {
            lambda: self.lambda?,
            lambda_h_bar: self.lambda_h_bar?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(contract(format!(
                "stepsize gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(contract(format!(
                "momentum alpha must lie in (0, 1], got {}",
                self.alpha
            )));
        }
        if self.g0 == G0Init::Batch(0) {
            return Err(contract("initial batch size must be at least 1"));
        }
        for (name, v) in [("lambda", self.lambda), ("lambda_h_bar", self.lambda_h_bar)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(contract(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

/// `ceil(x)`, except values within `1e-9` relative of an integer snap to it,
/// so that `10^2` evaluated as `100.00000000000001` stays 100.
fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// Initial batch size of the in-expectation schedule.
pub fn thm2_batch_size(sigma: f64, epsilon: f64, p: f64) -> u64 {
    let ratio = sigma / epsilon;
    let b = 1f64
        .max(ratio.powf(p / (p - 1.0)))
        .max(ratio.powf(p / (2.0 * p - 1.0)));
    ceil_snapped(b) as u64
}

/// Initial momentum error bound `E0 = 2 sigma / B^{(p-1)/p}`.
pub fn initial_error(sigma: f64, b_init: u64, p: f64) -> f64 {
    2.0 * sigma / (b_init as f64).powf((p - 1.0) / p)
}

/// In-expectation (`thm2`) parameters with the batched `g0`.
pub fn schedule_thm2(c: &ProblemConstants) -> Result<Schedule> {
    schedule_thm2_with_init(c, G0Init::Batch(0))
}

/// In-expectation parameters for a chosen `g0` initialization. `Batch(_)` uses
/// [`thm2_batch_size`] whatever count is passed; `Exact` has `E0 = 0` and
/// `Zero` has `E0 = sqrt(2 Delta L)`.
pub fn schedule_thm2_with_init(c: &ProblemConstants, init: G0Init) -> Result<Schedule> {
    c.validate()?;
    let p = c.p;
    let big_l = c.l + c.sigma_h;
    let t = c.t as f64;
    let (g0, e0) = match init {
        G0Init::Batch(_) => {
            let b = thm2_batch_size(c.sigma, c.epsilon, p);
            (G0Init::Batch(b), initial_error(c.sigma, b, p))
        }
        G0Init::Exact => (G0Init::Exact, 0.0),
        G0Init::Zero => (G0Init::Zero, (2.0 * c.delta * c.l).sqrt()),
    };
    let alpha = if c.sigma == 0.0 {
        log::warn!("sigma = 0: noiseless case, using alpha = 1");
        1.0
    } else {
        let e = p / (2.0 * p - 1.0);
        let a_init = (e0 / (t * c.sigma)).powf(e);
        let a_smooth = (c.delta * big_l / (t * c.sigma * c.sigma)).powf(e);
        1f64.min(a_init.max(a_smooth))
    };
    let gamma = (c.delta * alpha.powf(1.0 / p) / (big_l * t)).sqrt();
    if !(gamma > 0.0) {
        return Err(config("Delta = 0 makes the in-expectation stepsize vanish"));
    }
    let s = Schedule {
        gamma,
        alpha,
        g0,
        lambda: None,
        lambda_h_bar: None,
        provenance: Provenance::Thm2,
    };
    s.validate()?;
    Ok(s)
}

/// `alpha = T^{-p/(2p-1)}`.
pub fn thm3_alpha(t: u64, p: f64) -> f64 {
    (t as f64).powf(-p / (2.0 * p - 1.0))
}

/// The five upper bounds on `gamma` of the high-probability schedule.
pub fn thm3_gamma_arms(c: &ProblemConstants) -> Result<[f64; 5]> {
    c.validate()?;
    let t = c.t as f64;
    let log_term = (8.0 * t / c.delta_prob).ln();
    if log_term < 1.0 {
        return Err(config(format!(
            "the high-probability schedule needs log(8T/delta) >= 1, got {log_term:.4} at T={} delta={}",
            c.t, c.delta_prob
        )));
    }
    let p = c.p;
    let a = thm3_alpha(c.t, p);
    let (d1, l) = (c.delta, c.l);
    Ok([
        0.5 * (d1 / (l * t)).sqrt(),
        a / 12.0 * (d1 / l).sqrt(),
        (d1 / l).sqrt() / (1408.0 * a * t * log_term),
        d1 / (352.0 * c.sigma * a.powf((p - 1.0) / p) * t * log_term),
        (d1 * a.powf(1.0 / p) / (968.0 * (l + c.sigma_h) * t * log_term)).sqrt(),
    ])
}

fn thm3_clip_levels(c: &ProblemConstants, alpha: f64) -> (f64, f64) {
    let a_root = alpha.powf(1.0 / c.p);
    let lambda = (4.0 * (c.l * c.delta).sqrt()).max(c.sigma / a_root);
    let lambda_h_bar = 2.0 * (c.l + c.sigma_h) / a_root;
    (lambda, lambda_h_bar)
}

/// High-probability (`thm3`) parameters, with the stepsize bound taken at equality.
pub fn schedule_thm3(c: &ProblemConstants) -> Result<Schedule> {
    let arms = thm3_gamma_arms(c)?;
    let gamma = arms.iter().copied().fold(f64::INFINITY, f64::min);
    if !(gamma > 0.0) {
        return Err(config(
            "Delta_1 = 0 makes the high-probability stepsize vanish",
        ));
    }
    let alpha = thm3_alpha(c.t, c.p);
    let (lambda, lambda_h_bar) = thm3_clip_levels(c, alpha);
    let s = Schedule {
        gamma,
        alpha,
        g0: G0Init::Zero,
        lambda: Some(lambda),
        lambda_h_bar: Some(lambda_h_bar),
        provenance: Provenance::Thm3,
    };
    s.validate()?;
    Ok(s)
}

/// High-probability exponents and clip levels with `gamma = scale * alpha`.
pub fn schedule_thm3_shape(c: &ProblemConstants, scale: f64) -> Result<Schedule> {
    c.validate()?;
    let alpha = thm3_alpha(c.t, c.p);
    let (lambda, lambda_h_bar) = thm3_clip_levels(c, alpha);
    let s = Schedule {
        gamma: scale * alpha,
        alpha,
        g0: G0Init::Zero,
        lambda: Some(lambda),
        lambda_h_bar: Some(lambda_h_bar),
        provenance: Provenance::Thm3Shape,
    };
    s.validate()?;
    Ok(s)
}

/// Clip NSGDM comparison schedule `gamma = T^{-(2p-1)/(3p-2)}`, `alpha = T^{-p/(3p-2)}`.
/// The clip level is supplied by the caller.
pub fn schedule_clip_nsgdm_baseline(t: u64, p: f64) -> Result<Schedule> {
    if t < 1 {
        return Err(contract("horizon T must be at least 1"));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(contract(format!(
            "moment order p must lie in (1, 2], got {p}"
        )));
    }
    let t = t as f64;
    Ok(Schedule {
        gamma: t.powf(-(2.0 * p - 1.0) / (3.0 * p - 2.0)),
        alpha: t.powf(-p / (3.0 * p - 2.0)),
        g0: G0Init::Zero,
        lambda: None,
        lambda_h_bar: None,
        provenance: Provenance::ClipNsgdmBaseline,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `Delta sigma_h / eps^2 (sigma/eps)^{1/(p-1)}`.
    LowerSecondOrder,
    /// `Delta L sigma / eps^3 (sigma/eps)^{1/(p-1)}`.
    LowerFirstOrder,
    /// `Delta sqrt(L_h) sigma / eps^{5/2} (sigma/eps)^{1/(p-1)}`; needs `l_h`.
    LowerHessianLipschitz,
    /// Minimum of the lower-bound terms that are defined.
    LowerBound,
    /// Upper bound of the in-expectation schedule.
    UpperThm2,
}

/// Leading-order sample complexity, without the absolute constants.
pub fn predicted_sample_complexity(c: &ProblemConstants, regime: Regime) -> Result<f64> {
    c.validate()?;
    let eps = c.epsilon;
    let tail = (c.sigma / eps).powf(1.0 / (c.p - 1.0));
    let second = c.delta * c.sigma_h / (eps * eps) * tail;
    let first = c.delta * c.l * c.sigma / eps.powi(3) * tail;
    let lipschitz = c
        .l_h
        .map(|lh| c.delta * lh.sqrt() * c.sigma / eps.powf(2.5) * tail);
    Ok(match regime {
        Regime::LowerSecondOrder => second,
        Regime::LowerFirstOrder => first,
        Regime::LowerHessianLipschitz => {
            lipschitz.ok_or_else(|| config("Hessian Lipschitz constant L_h was not declared"))?
        }
        Regime::LowerBound => second.min(first).min(lipschitz.unwrap_or(f64::INFINITY)),
        Regime::UpperThm2 => {
            let base = c.delta * (c.l + c.sigma_h) / (eps * eps);
            base + base * tail + (c.sigma / eps) * tail
        }
    })
}

/// Smallest accuracy `eps` whose predicted complexity fits in `budget`,
/// by bisection on `log eps` over `[1e-12, 1e12]`.
pub fn epsilon_for_budget(c: &ProblemConstants, regime: Regime, budget: f64) -> Result<f64> {
    if !(budget > 0.0) {
        return Err(contract(format!(
            "sample budget must be positive, got {budget}"
        )));
    }
    let at = |log_eps: f64| {
        let cc = ProblemConstants {
            epsilon: log_eps.exp(),
            ..*c
        };
        predicted_sample_complexity(&cc, regime)
    };
    let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
    if at(hi)? > budget {
        return Err(config(format!(
            "budget {budget} is below the complexity at eps = 1e12"
        )));
    }
    if at(lo)? <= budget {
        return Ok(lo.exp());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? <= budget {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn consts(t: u64, p: f64) -> ProblemConstants {
        ProblemConstants {
            epsilon: 0.1,
            ..ProblemConstants::new(1.0, 1.0, 1.0, 1.0, p, t)
        }
    }

    fn slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        num / den
    }

    #[test]
    fn thm2_batch_and_initial_error() {
        assert_eq!(thm2_batch_size(1.0, 0.1, 2.0), 100);
        assert_eq!(thm2_batch_size(1.0, 2.0, 1.5), 1);
        assert!((initial_error(1.0, 100, 2.0) - 0.2).abs() < 1e-15);
        let s = schedule_thm2(&consts(1000, 2.0)).unwrap();
        assert_eq!(s.g0, G0Init::Batch(100));
        assert_eq!(s.b_init(), 100);
    }

    #[test]
    fn thm2_formulas() {
        let c = consts(1000, 1.5);
        let s = schedule_thm2(&c).unwrap();
        let b = thm2_batch_size(1.0, 0.1, 1.5);
        let e0 = 2.0 / (b as f64).powf(0.5 / 1.5);
        let e = 1.5 / 2.0;
        let a = (e0 / 1000.0)
            .powf(e)
            .max((2.0 / 1000.0f64).powf(e))
            .min(1.0);
        assert!((s.alpha - a).abs() < 1e-15);
        assert!((s.gamma - (a.powf(1.0 / 1.5) / 2000.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.provenance, Provenance::Thm2);
    }

    #[test]
    fn thm2_initialization_variants() {
        let c = consts(1000, 2.0);
        let exact = schedule_thm2_with_init(&c, G0Init::Exact).unwrap();
        assert!((exact.alpha - (2.0 / 1000.0f64).powf(2.0 / 3.0)).abs() < 1e-15);
        assert_eq!(exact.b_init(), 0);
        let c = ProblemConstants { sigma_h: 0.0, ..c };
        let zero = schedule_thm2_with_init(&c, G0Init::Zero).unwrap();
        let e0 = 2f64.sqrt();
        assert!((zero.alpha - (e0 / 1000.0).powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn thm2_noiseless_falls_back_to_unit_momentum() {
        let c = ProblemConstants {
            sigma: 0.0,
            ..consts(100, 2.0)
        };
        let s = schedule_thm2(&c).unwrap();
        assert_eq!(s.alpha, 1.0);
        assert_eq!(s.b_init(), 1);
    }

    #[test]
    fn thm2_rejects_bad_constants() {
        assert!(schedule_thm2(&ProblemConstants {
            p: 2.5,
            ..consts(10, 2.0)
        })
        .is_err());
        assert!(schedule_thm2(&ProblemConstants {
            delta: 0.0,
            ..consts(10, 2.0)
        })
        .is_err());
        assert!(schedule_thm2(&ProblemConstants {
            t: 0,
            ..consts(10, 2.0)
        })
        .is_err());
    }

    #[test]
    fn thm3_alpha_fixture() {
        let a = thm3_alpha(4000, 2.0);
        assert!((a - 4000f64.powf(-2.0 / 3.0)).abs() < 1e-12);
        assert!((a - 3.969e-3).abs() < 1e-6);
    }

    #[test]
    fn thm3_gamma_is_minimum_of_arms() {
        let c = ProblemConstants {
            delta: 5.0,
            ..consts(4000, 1.5)
        };
        let s = schedule_thm3(&c).unwrap();
        let arms = thm3_gamma_arms(&c).unwrap();
        assert!(arms.iter().all(|&a| s.gamma <= a));
        assert!(arms.contains(&s.gamma));
        let a_root = s.alpha.powf(1.0 / 1.5);
        assert_eq!(s.lambda, Some((4.0 * 5f64.sqrt()).max(1.0 / a_root)));
        assert_eq!(s.lambda_h_bar, Some(4.0 / a_root));
    }

    #[test]
    fn thm3_lambda_takes_noise_arm_for_small_alpha() {
        let c = ProblemConstants {
            delta: 5.0,
            sigma: 10.0,
            ..consts(4000, 2.0)
        };
        let s = schedule_thm3(&c).unwrap();
        assert_eq!(s.lambda, Some(10.0 / s.alpha.sqrt()));
    }

    #[test]
    fn thm3_log_hypothesis_holds_for_valid_constants() {
        // T >= 1 and delta <= 1 give log(8T/delta) >= log 8
        let c = ProblemConstants {
            delta_prob: 1.0,
            ..consts(1, 2.0)
        };
        assert!(schedule_thm3(&c).is_ok());
        assert!(schedule_thm3(&ProblemConstants {
            delta_prob: 1.5,
            ..c
        })
        .is_err());
    }

    #[test]
    fn thm3_gamma_monotone_in_horizon_and_confidence() {
        for p in [1.2, 1.5, 2.0] {
            let mut prev = f64::INFINITY;
            for k in 4..24 {
                let g = schedule_thm3(&consts(1 << k, p)).unwrap().gamma;
                assert!(g <= prev);
                prev = g;
            }
            let mut prev = f64::INFINITY;
            for k in 1..12 {
                let c = ProblemConstants {
                    delta_prob: 10f64.powi(-k),
                    ..consts(1000, p)
                };
                let g = schedule_thm3(&c).unwrap().gamma;
                assert!(g <= prev);
                prev = g;
            }
        }
    }

    #[test]
    fn thm3_clip_levels_grow_like_power_of_horizon() {
        for p in [1.25, 1.5, 2.0] {
            let growth = 2f64.powf(1.0 / (2.0 * p - 1.0));
            let c = ProblemConstants {
                delta: 1e-6,
                ..consts(1 << 10, p)
            };
            let mut prev = schedule_thm3(&c).unwrap();
            for k in 11..20 {
                let s = schedule_thm3(&ProblemConstants { t: 1 << k, ..c }).unwrap();
                let r = s.lambda.unwrap() / prev.lambda.unwrap();
                let rh = s.lambda_h_bar.unwrap() / prev.lambda_h_bar.unwrap();
                assert!((r - growth).abs() < 1e-9 && (rh - growth).abs() < 1e-9);
                prev = s;
            }
        }
    }

    #[test]
    fn thm3_exponent_slopes() {
        for p in [1.25, 1.5, 2.0] {
            let target = -p / (2.0 * p - 1.0);
            let ks: Vec<u32> = (10..=30).collect();
            let logs: Vec<f64> = ks.iter().map(|&k| (k as f64) * 2f64.ln()).collect();
            let mut alphas = Vec::new();
            let mut gammas = Vec::new();
            for &k in &ks {
                let c = consts(1 << k, p);
                let s = schedule_thm3(&c).unwrap();
                alphas.push(s.alpha.ln());
                let log_term = (8.0 * (1u64 << k) as f64 / c.delta_prob).ln();
                gammas.push((s.gamma * log_term).ln());
            }
            assert!((slope(&logs, &alphas) - target).abs() < 1e-12);
            let gs = slope(&logs, &gammas);
            assert!((gs - target).abs() < 0.02, "p={p}: gamma slope {gs}");
        }
    }

    #[test]
    fn thm3_shape_ties_stepsize_to_momentum() {
        let s = schedule_thm3_shape(&consts(4000, 2.0), 1.0).unwrap();
        assert_eq!(s.gamma, s.alpha);
        assert_eq!(s.provenance, Provenance::Thm3Shape);
    }

    #[test]
    fn baseline_fixtures() {
        let s = schedule_clip_nsgdm_baseline(4000, 2.0).unwrap();
        assert!((s.gamma - 4000f64.powf(-0.75)).abs() < 1e-12);
        assert!((s.gamma - 1.988e-3).abs() < 1e-6);
        assert!((s.alpha - 4000f64.powf(-0.5)).abs() < 1e-12);
        assert!((s.alpha - 1.581e-2).abs() < 1e-5);
        let one = schedule_clip_nsgdm_baseline(1, 1.5).unwrap();
        assert_eq!((one.gamma, one.alpha), (1.0, 1.0));
        assert!(schedule_clip_nsgdm_baseline(0, 1.5).is_err());
    }

    #[test]
    fn complexity_terms() {
        let c = consts(1, 2.0);
        let first = predicted_sample_complexity(&c, Regime::LowerFirstOrder).unwrap();
        let second = predicted_sample_complexity(&c, Regime::LowerSecondOrder).unwrap();
        assert!((first - 1e4).abs() < 1e-8);
        assert!((second - 1e3).abs() < 1e-9);
        assert!((second / first - 0.1).abs() < 1e-15);
        assert_eq!(
            predicted_sample_complexity(&c, Regime::LowerBound).unwrap(),
            second
        );
        assert!(predicted_sample_complexity(&c, Regime::LowerHessianLipschitz).is_err());
        let upper = predicted_sample_complexity(&c, Regime::UpperThm2).unwrap();
        assert!((upper - (200.0 + 2000.0 + 100.0)).abs() < 1e-9);
    }

    #[test]
    fn budget_inversion_round_trips() {
        let c = consts(1, 1.5);
        for regime in [Regime::LowerSecondOrder, Regime::UpperThm2] {
            for budget in [1e3, 1e6, 1e9] {
                let eps = epsilon_for_budget(&c, regime, budget).unwrap();
                let back =
                    predicted_sample_complexity(&ProblemConstants { epsilon: eps, ..c }, regime)
                        .unwrap();
                assert!(
                    (back / budget - 1.0).abs() < 1e-9,
                    "{regime:?} {budget}: {back}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn alpha_never_exceeds_one(
            delta in 1e-3..1e3f64, l in 1e-3..1e3f64, sigma in 1e-3..1e3f64,
            sigma_h in 0.0..1e3f64, p in 1.01..2.0f64, eps in 1e-3..10.0f64, t in 1u64..100_000,
        ) {
            let c = ProblemConstants { epsilon: eps, ..ProblemConstants::new(delta, l, sigma, sigma_h, p, t) };
            let s = schedule_thm2(&c).unwrap();
            prop_assert!(s.alpha > 0.0 && s.alpha <= 1.0);
            prop_assert!(s.b_init() >= 1);
        }

        #[test]
        fn complexity_decreases_in_epsilon(p in 1.05..2.0f64, e1 in 1e-3..1.0f64, k in 1.01..10.0f64) {
            let c = ProblemConstants { epsilon: e1, ..ProblemConstants::new(1.0, 1.0, 1.0, 1.0, p, 1) };
            let hi = ProblemConstants { epsilon: e1 * k, ..c };
            for regime in [Regime::LowerBound, Regime::UpperThm2] {
                prop_assert!(
                    predicted_sample_complexity(&hi, regime).unwrap()
                        < predicted_sample_complexity(&c, regime).unwrap()
                );
            }
        }
    }
}

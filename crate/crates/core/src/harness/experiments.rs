//! Seeded multi-run experiment drivers and their CSV tables.
//!
//! Every driver is a pure function of its configuration: seeds run in
//! parallel, results are reduced in seed order, and runs that never reach the
//! target count as `iterations` in medians.

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::table::{fmt_f64, fmt_opt, Table};
use crate::error::{config, Result};
use crate::hardinstance::{prog, rescale_for_target, HardInstanceTarget, ZeroChainOracle};
use crate::noise::median;
use crate::numerics::DenseVector;
use crate::optimizers::{run, run_observed, Method, OptimizerSpec, RunTrace};
use crate::problems::StochasticOracle;
use crate::schedules::{
    schedule_clip_nsgdm_baseline, schedule_thm3_shape, G0Init, ProblemConstants, Schedule,
};

/// First `t` with `||grad F(x_t)|| <= target`.
pub fn iterations_to_target(trace: &RunTrace, target: f64) -> Option<usize> {
    trace.iterations_to_target(target)
}

/// Per-run digest kept instead of the full trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub seed: u64,
    pub hit: Option<usize>,
    pub terminal: f64,
    pub avg: f64,
    pub min: f64,
    pub max_momentum: f64,
    /// `lambda + (1 - alpha) gamma lambda_h_bar / alpha` for Clip NSGDHess runs.
    pub momentum_bound: Option<f64>,
    pub samples_used: u64,
}

impl RunSummary {
    pub fn of(trace: &RunTrace, target: f64) -> Self {
        let h = &trace.header;
        let momentum_bound = match (h.method, h.lambda, h.lambda_h_bar) {
            (Method::ClipNsgdHess, Some(l), Some(lh)) => {
                Some(l + (1.0 - h.alpha) * h.gamma * lh / h.alpha)
            }
            _ => None,
        };
        Self {
            seed: h.seed,
            hit: trace.iterations_to_target(target),
            terminal: trace.terminal_grad_norm(),
            avg: trace.avg_grad_norm(),
            min: trace.min_grad_norm(),
            max_momentum: trace
                .rows
                .iter()
                .map(|r| r.momentum_norm)
                .fold(0.0, f64::max),
            momentum_bound,
            samples_used: trace.rows.last().map_or(0, |r| r.samples_used),
        }
    }

    pub fn momentum_bound_holds(&self) -> bool {
        self.momentum_bound
            .is_none_or(|b| self.max_momentum <= b * (1.0 + 1e-12))
    }
}

/// Median with runs that never reached the target counted as `horizon`.
pub fn median_iterations(summaries: &[RunSummary], horizon: usize) -> f64 {
    let mut xs: Vec<f64> = summaries
        .iter()
        .map(|s| s.hit.unwrap_or(horizon) as f64)
        .collect();
    median(&mut xs)
}

pub fn count_momentum_violations(summaries: &[RunSummary]) -> usize {
    summaries
        .iter()
        .filter(|s| !s.momentum_bound_holds())
        .count()
}

fn run_seeds(
    cfg: &ExperimentConfig,
    oracle: &dyn StochasticOracle,
    method: Method,
    schedule: &Schedule,
    x0: &DenseVector,
    horizon: usize,
) -> Result<Vec<RunTrace>> {
    let hash = cfg.hash();
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let mut tr = run(
                &OptimizerSpec::new(method),
                oracle,
                schedule,
                x0,
                horizon,
                seed,
            )?;
            tr.header.config_hash = Some(hash.clone());
            Ok(tr)
        })
        .collect()
}

fn summarize(
    cfg: &ExperimentConfig,
    target: f64,
    method: Method,
    schedule: &Schedule,
    problem: &super::config::ProblemConfig,
    horizon: usize,
) -> Result<Vec<RunSummary>> {
    let oracle = problem.build()?;
    let x0 = problem.x0();
    let hash = cfg.hash();
    cfg.seeds
        .par_iter()
        .map(|&seed| {
            let mut tr = run(
                &OptimizerSpec::new(method),
                oracle.as_ref(),
                schedule,
                &x0,
                horizon,
                seed,
            )?;
            tr.header.config_hash = Some(hash.clone());
            Ok(RunSummary::of(&tr, target))
        })
        .collect()
}

fn base_table(cfg: &ExperimentConfig, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    let x0 = cfg.problem.x0();
    t.meta("experiment", cfg.experiment.label())
        .meta("config_hash", cfg.hash())
        .meta("seeds", cfg.seeds.len())
        .meta("iterations", cfg.iterations)
        .meta("target", fmt_f64(cfg.target))
        .meta("dim", cfg.problem.dim)
        .meta("x0_seed", cfg.problem.x0_seed)
        .meta("x0_norm", fmt_f64(x0.norm()))
        .meta("tail_index", fmt_f64(cfg.problem.noise.tail_index))
        .meta("noise_scale", fmt_f64(cfg.problem.noise.scale))
        .meta("hessian_noise", noise_label(&cfg.problem.hessian_noise))
        .meta("gamma", fmt_f64(cfg.optimizer.gamma))
        .meta("alpha", fmt_f64(cfg.optimizer.alpha))
        .meta("lambda", fmt_opt(cfg.optimizer.lambda))
        .meta("lambda_h_bar", fmt_opt(cfg.optimizer.lambda_h_bar));
    t
}

fn noise_label(spec: &crate::noise::TailSpec) -> String {
    if spec.is_none() {
        "none".into()
    } else {
        format!("tail_index {} scale {}", spec.tail_index, spec.scale)
    }
}

fn manual_schedule(cfg: &ExperimentConfig) -> Result<Schedule> {
    cfg.optimizer.schedule()
}

/// A single trace of the configured method with the first seed.
pub fn experiment_run(cfg: &ExperimentConfig) -> Result<RunTrace> {
    cfg.validate()?;
    let oracle = cfg.problem.build()?;
    let seed = cfg.seeds[0];
    let mut tr = run(
        &OptimizerSpec::new(cfg.optimizer.method),
        oracle.as_ref(),
        &manual_schedule(cfg)?,
        &cfg.problem.x0(),
        cfg.iterations,
        seed,
    )?;
    tr.header.config_hash = Some(cfg.hash());
    Ok(tr)
}

pub const FIG2_METHODS: [Method; 4] = [
    Method::Nsgdm,
    Method::NsgdHess,
    Method::ClipNsgdm,
    Method::ClipNsgdHess,
];

#[derive(Clone, Debug)]
pub struct MethodRuns {
    pub method: Method,
    /// Median over seeds of `||grad F(x_t)||`, per `t`.
    pub median_trace: Vec<f64>,
    pub summaries: Vec<RunSummary>,
}

impl MethodRuns {
    pub fn median_terminal(&self) -> f64 {
        let mut xs: Vec<f64> = self.summaries.iter().map(|s| s.terminal).collect();
        median(&mut xs)
    }

    pub fn hit_fraction(&self) -> f64 {
        self.summaries.iter().filter(|s| s.hit.is_some()).count() as f64
            / self.summaries.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct Fig2Result {
    pub runs: Vec<MethodRuns>,
    pub table: Table,
}

impl Fig2Result {
    pub fn get(&self, m: Method) -> &MethodRuns {
        self.runs
            .iter()
            .find(|r| r.method == m)
            .expect("method was run")
    }

    pub fn momentum_violations(&self) -> usize {
        self.runs
            .iter()
            .map(|r| count_momentum_violations(&r.summaries))
            .sum()
    }
}

/// Clipped and unclipped momentum methods on one problem with shared seeds.
pub fn experiment_fig2(cfg: &ExperimentConfig) -> Result<Fig2Result> {
    cfg.validate()?;
    let oracle = cfg.problem.build()?;
    let x0 = cfg.problem.x0();
    let schedule = manual_schedule(cfg)?;
    let mut runs = Vec::new();
    for m in FIG2_METHODS {
        let traces = run_seeds(cfg, oracle.as_ref(), m, &schedule, &x0, cfg.iterations)?;
        let median_trace = (0..cfg.iterations)
            .map(|t| {
                let mut col: Vec<f64> = traces.iter().map(|tr| tr.rows[t].grad_norm).collect();
                median(&mut col)
            })
            .collect();
        let summaries = traces
            .iter()
            .map(|tr| RunSummary::of(tr, cfg.target))
            .collect();
        runs.push(MethodRuns {
            method: m,
            median_trace,
            summaries,
        });
    }
    let mut cols = vec!["t"];
    cols.extend(FIG2_METHODS.iter().map(|m| m.label()));
    let mut table = base_table(cfg, &cols);
    for r in &runs {
        table.meta(
            &format!("median_terminal_{}", r.method),
            fmt_f64(r.median_terminal()),
        );
        table.meta(
            &format!("hit_fraction_{}", r.method),
            fmt_f64(r.hit_fraction()),
        );
    }
    for t in 0..cfg.iterations {
        let mut row = vec![t.to_string()];
        row.extend(runs.iter().map(|r| fmt_f64(r.median_trace[t])));
        table.push(row);
    }
    Ok(Fig2Result { runs, table })
}

#[derive(Clone, Debug)]
pub struct SweepCell {
    pub label: String,
    pub method: Method,
    pub lambda: Option<f64>,
    pub lambda_h_bar: Option<f64>,
    pub tail_index: f64,
    pub median_iterations: f64,
    pub reached: usize,
    pub summaries: Vec<RunSummary>,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
    pub table: Table,
}

impl SweepResult {
    pub fn momentum_violations(&self) -> usize {
        self.cells
            .iter()
            .map(|c| count_momentum_violations(&c.summaries))
            .sum()
    }

    pub fn medians(&self, label: &str) -> Vec<f64> {
        self.cells
            .iter()
            .filter(|c| c.label == label)
            .map(|c| c.median_iterations)
            .collect()
    }
}

const SWEEP_COLUMNS: [&str; 8] = [
    "group",
    "method",
    "tail_index",
    "lambda",
    "lambda_h_bar",
    "median_iterations",
    "reached",
    "runs",
];

fn sweep_table(cfg: &ExperimentConfig, cells: &[SweepCell]) -> Table {
    let mut t = base_table(cfg, &SWEEP_COLUMNS);
    for c in cells {
        t.push(vec![
            c.label.clone(),
            c.method.to_string(),
            fmt_f64(c.tail_index),
            fmt_opt(c.lambda),
            fmt_opt(c.lambda_h_bar),
            fmt_f64(c.median_iterations),
            c.reached.to_string(),
            c.summaries.len().to_string(),
        ]);
    }
    t
}

fn cell(
    cfg: &ExperimentConfig,
    label: String,
    method: Method,
    schedule: &Schedule,
    problem: &super::config::ProblemConfig,
) -> Result<SweepCell> {
    let summaries = summarize(cfg, cfg.target, method, schedule, problem, cfg.iterations)?;
    Ok(SweepCell {
        label,
        method,
        lambda: schedule.lambda,
        lambda_h_bar: schedule.lambda_h_bar,
        tail_index: problem.noise.tail_index,
        median_iterations: median_iterations(&summaries, cfg.iterations),
        reached: summaries.iter().filter(|s| s.hit.is_some()).count(),
        summaries,
    })
}

/// Clip NSGDHess over `sweep.lambdas` with the HVP threshold tied to the
/// gradient threshold, `lambda_h = gamma lambda_h_bar = lambda`.
pub fn experiment_clip_sensitivity(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.sweep.lambdas.is_empty() {
        return Err(config(
            "clip-sensitivity needs a non-empty sweep.lambdas grid",
        ));
    }
    let gamma = cfg.optimizer.gamma;
    let mut cells = Vec::new();
    for &lambda in &cfg.sweep.lambdas {
        let s =
            Schedule::manual(gamma, cfg.optimizer.alpha)?.with_clipping(lambda, lambda / gamma)?;
        cells.push(cell(
            cfg,
            "lambda".into(),
            Method::ClipNsgdHess,
            &s,
            &cfg.problem,
        )?);
    }
    let table = sweep_table(cfg, &cells);
    Ok(SweepResult { cells, table })
}

/// Clip NSGDHess (`gamma = alpha = T^{-p/(2p-1)}`) against Clip NSGDM (baseline
/// schedule) across tail indices, with `p` the tail index capped at 2.
pub fn experiment_fig4(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if cfg.sweep.tail_indices.is_empty() {
        return Err(config("fig4 needs a non-empty sweep.tail_indices grid"));
    }
    let lambda = cfg
        .optimizer
        .lambda
        .ok_or_else(|| config("fig4 needs optimizer.lambda"))?;
    let lambda_h_bar = cfg
        .optimizer
        .lambda_h_bar
        .ok_or_else(|| config("fig4 needs optimizer.lambda_h_bar"))?;
    let t = cfg.iterations as u64;
    let mut cells = Vec::new();
    for &tail in &cfg.sweep.tail_indices {
        let problem = cfg.problem.with_tail_index(tail);
        let p = tail.min(2.0);
        let a = crate::schedules::thm3_alpha(t, p);
        let hess = Schedule::manual(a, a)?
            .with_g0(G0Init::Zero)
            .with_clipping(lambda, lambda_h_bar)?;
        cells.push(cell(
            cfg,
            "clip-nsgd-hess".into(),
            Method::ClipNsgdHess,
            &hess,
            &problem,
        )?);
        let base = schedule_clip_nsgdm_baseline(t, p)?.with_lambda(lambda)?;
        cells.push(cell(
            cfg,
            "clip-nsgdm".into(),
            Method::ClipNsgdm,
            &base,
            &problem,
        )?);
    }
    let table = sweep_table(cfg, &cells);
    Ok(SweepResult { cells, table })
}

/// Median iterations over a gradient clip grid at each HVP clip level.
pub fn experiment_fig5(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let sw = &cfg.sweep;
    if sw.lambda_h_bars.is_empty() || sw.lambda_grids.len() != sw.lambda_h_bars.len() {
        return Err(config(
            "fig5 needs one sweep.lambda_grids entry per sweep.lambda_h_bars value",
        ));
    }
    let mut cells = Vec::new();
    for (&lhb, grid) in sw.lambda_h_bars.iter().zip(&sw.lambda_grids) {
        if grid.is_empty() {
            return Err(config(format!("empty lambda grid for lambda_h_bar={lhb}")));
        }
        for &lambda in grid {
            let s = Schedule::manual(cfg.optimizer.gamma, cfg.optimizer.alpha)?
                .with_clipping(lambda, lhb)?;
            cells.push(cell(
                cfg,
                format!("lambda_h_bar={lhb}"),
                Method::ClipNsgdHess,
                &s,
                &cfg.problem,
            )?);
        }
    }
    let table = sweep_table(cfg, &cells);
    Ok(SweepResult { cells, table })
}

#[derive(Clone, Debug)]
pub struct RatePoint {
    pub horizon: usize,
    pub median_avg_grad_norm: f64,
    pub schedule: Schedule,
    pub summaries: Vec<RunSummary>,
}

#[derive(Clone, Debug)]
pub struct RateSeries {
    pub p: f64,
    pub tail_index: f64,
    pub slope: f64,
    /// `-(p-1)/(2p-1)`.
    pub predicted: f64,
    pub points: Vec<RatePoint>,
}

#[derive(Clone, Debug)]
pub struct RateResult {
    pub series: Vec<RateSeries>,
    pub table: Table,
}

impl RateResult {
    pub fn momentum_violations(&self) -> usize {
        self.series
            .iter()
            .flat_map(|s| &s.points)
            .map(|p| count_momentum_violations(&p.summaries))
            .sum()
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Problem constants for a schedule: `Delta_1 = F(x0) - F*`, `L` from the
/// oracle, `sigma` and `sigma_h` from the noise specs at moment order `p`.
pub fn derive_constants(
    problem: &super::config::ProblemConfig,
    p: f64,
    horizon: u64,
) -> Result<ProblemConstants> {
    let oracle = problem.build()?;
    let declared = oracle.constants();
    let l = declared
        .smoothness
        .ok_or_else(|| config("problem does not declare L"))?;
    let f_star = declared
        .f_star
        .ok_or_else(|| config("problem does not declare F*"))?;
    let d = problem.dim;
    let sigma = problem.noise.vector_bcm_bound(p, d).ok_or_else(|| {
        config(format!(
            "gradient noise has no finite moment of order p={p}"
        ))
    })?;
    let sigma_h = problem
        .hessian_noise
        .matrix_bcm_bound(p, d)
        .ok_or_else(|| config(format!("Hessian noise has no finite moment of order p={p}")))?;
    let delta = oracle.exact_value(&problem.x0()) - f_star;
    Ok(ProblemConstants::new(delta, l, sigma, sigma_h, p, horizon))
}

/// Average gradient norm of Clip NSGDHess with the high-probability exponents and clip
/// levels (`gamma = alpha`), fitted in log-log against the horizon.
pub fn experiment_rate(cfg: &ExperimentConfig) -> Result<RateResult> {
    cfg.validate()?;
    let sw = &cfg.sweep;
    let margin = sw.tail_margin.unwrap_or(0.5);
    let mut series = Vec::new();
    for &p in &sw.moment_orders {
        let tail = p + margin;
        let problem = cfg.problem.with_tail_index(tail);
        let mut points = Vec::new();
        for &h in &sw.horizons {
            let c = derive_constants(&problem, p, h as u64)?;
            let schedule = schedule_thm3_shape(&c, 1.0)?;
            let summaries = summarize(
                cfg,
                cfg.target,
                Method::ClipNsgdHess,
                &schedule,
                &problem,
                h,
            )?;
            let mut avgs: Vec<f64> = summaries.iter().map(|s| s.avg).collect();
            points.push(RatePoint {
                horizon: h,
                median_avg_grad_norm: median(&mut avgs),
                schedule,
                summaries,
            });
        }
        let xs: Vec<f64> = points.iter().map(|pt| (pt.horizon as f64).ln()).collect();
        let ys: Vec<f64> = points
            .iter()
            .map(|pt| pt.median_avg_grad_norm.ln())
            .collect();
        series.push(RateSeries {
            p,
            tail_index: tail,
            slope: fit_slope(&xs, &ys),
            predicted: -(p - 1.0) / (2.0 * p - 1.0),
            points,
        });
    }
    let mut table = base_table(
        cfg,
        &[
            "p",
            "tail_index",
            "horizon",
            "gamma",
            "alpha",
            "lambda",
            "lambda_h_bar",
            "median_avg_grad_norm",
        ],
    );
    for s in &series {
        table.meta(&format!("slope_p{}", s.p), fmt_f64(s.slope));
        table.meta(&format!("predicted_p{}", s.p), fmt_f64(s.predicted));
        for pt in &s.points {
            table.push(vec![
                fmt_f64(s.p),
                fmt_f64(s.tail_index),
                pt.horizon.to_string(),
                fmt_f64(pt.schedule.gamma),
                fmt_f64(pt.schedule.alpha),
                fmt_opt(pt.schedule.lambda),
                fmt_opt(pt.schedule.lambda_h_bar),
                fmt_f64(pt.median_avg_grad_norm),
            ]);
        }
    }
    Ok(RateResult { series, table })
}

/// Any configured experiment, as its CSV table.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Table> {
    Ok(match cfg.experiment {
        ExperimentKind::Run => super::table::trace_table(&experiment_run(cfg)?),
        ExperimentKind::Fig2 => experiment_fig2(cfg)?.table,
        ExperimentKind::ClipSensitivity => experiment_clip_sensitivity(cfg)?.table,
        ExperimentKind::Fig4 => experiment_fig4(cfg)?.table,
        ExperimentKind::Fig5 => experiment_fig5(cfg)?.table,
        ExperimentKind::Rate => experiment_rate(cfg)?.table,
    })
}

/// `(Delta, eps, p, sigma) -> (T_dim, nu, beta, rho)` over a grid.
pub fn hard_instance_table(
    deltas: &[f64],
    epsilons: &[f64],
    ps: &[f64],
    sigmas: &[f64],
    sigma_h: Option<f64>,
) -> Result<Table> {
    let mut t = Table::new(&[
        "delta", "epsilon", "p", "sigma", "t_dim", "nu", "beta", "rho", "status",
    ]);
    t.meta("experiment", "hard-instance")
        .meta("sigma_h", fmt_opt(sigma_h));
    for &delta in deltas {
        for &eps in epsilons {
            for &p in ps {
                for &sigma in sigmas {
                    let mut target = HardInstanceTarget::new(delta, 1.0, sigma, eps, p);
                    target.sigma2 = sigma_h;
                    let mut row = vec![fmt_f64(delta), fmt_f64(eps), fmt_f64(p), fmt_f64(sigma)];
                    match rescale_for_target(&target) {
                        Ok(o) => row.extend([
                            o.chain.t_dim.to_string(),
                            fmt_f64(o.chain.nu),
                            fmt_f64(o.chain.beta),
                            fmt_f64(o.rho),
                            "ok".into(),
                        ]),
                        Err(crate::error::Error::Config(_)) => row.extend([
                            "".into(),
                            "".into(),
                            "".into(),
                            "".into(),
                            "infeasible".into(),
                        ]),
                        Err(e) => return Err(e),
                    }
                    t.push(row);
                }
            }
        }
    }
    Ok(t)
}

/// Run `method` from the origin on a zero-chain oracle, recording progress.
pub fn hard_instance_trace(
    oracle: &ZeroChainOracle,
    method: Method,
    schedule: &Schedule,
    horizon: usize,
    seed: u64,
) -> Result<Table> {
    let x0 = DenseVector::zeros(oracle.chain.t_dim);
    let beta = oracle.chain.beta;
    let mut progress = Vec::with_capacity(horizon);
    let trace = run_observed(
        &OptimizerSpec::new(method),
        oracle,
        schedule,
        &x0,
        horizon,
        seed,
        |st, _| {
            let y: Vec<f64> = st.x_prev.iter().map(|v| beta * v).collect();
            progress.push(prog(&y, 0.25));
        },
    )?;
    let mut t = Table::new(&["t", "grad_norm", "prog", "samples_used"]);
    t.meta("experiment", "hard-instance-trace")
        .meta("method", method)
        .meta("seed", seed)
        .meta("t_dim", oracle.chain.t_dim)
        .meta("nu", fmt_f64(oracle.chain.nu))
        .meta("beta", fmt_f64(beta))
        .meta("rho", fmt_f64(oracle.rho))
        .meta("gamma", fmt_f64(schedule.gamma))
        .meta("alpha", fmt_f64(schedule.alpha));
    for (r, k) in trace.rows.iter().zip(progress) {
        t.push(vec![
            r.t.to_string(),
            fmt_f64(r.grad_norm),
            k.to_string(),
            r.samples_used.to_string(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::TailSpec;
    use crate::optimizers::{TraceHeader, TraceRow};

    fn trace_from(norms: &[f64]) -> RunTrace {
        RunTrace {
            header: TraceHeader {
                method: Method::Nsgd,
                seed: 0,
                gamma: 0.1,
                alpha: 1.0,
                lambda: None,
                lambda_h_bar: None,
                b_init: 0,
                provenance: "manual".into(),
                config_hash: None,
            },
            rows: norms
                .iter()
                .enumerate()
                .map(|(t, &g)| TraceRow {
                    t,
                    grad_norm: g,
                    momentum_norm: g,
                    grad_clip: false,
                    hvp_clip: false,
                    q_t: None,
                    samples_used: t as u64,
                })
                .collect(),
        }
    }

    #[test]
    fn iterations_to_target_examples() {
        assert_eq!(iterations_to_target(&trace_from(&[0.5, 2.0]), 1.0), Some(0));
        let crossing: Vec<f64> = (0..10).map(|k| 10.0 - k as f64).collect();
        assert_eq!(iterations_to_target(&trace_from(&crossing), 3.0), Some(7));
        assert_eq!(iterations_to_target(&trace_from(&[5.0, 4.0]), 1.0), None);
    }

    #[test]
    fn censored_runs_count_as_horizon() {
        let mk = |hit| RunSummary {
            seed: 0,
            hit,
            terminal: 0.0,
            avg: 0.0,
            min: 0.0,
            max_momentum: 0.0,
            momentum_bound: None,
            samples_used: 0,
        };
        let s = [mk(Some(3)), mk(None), mk(None)];
        assert_eq!(median_iterations(&s, 100), 100.0);
    }

    fn small(mut cfg: ExperimentConfig) -> ExperimentConfig {
        cfg.seeds = (0..5).collect();
        cfg.iterations = 600;
        cfg
    }

    #[test]
    fn fig2_noiseless_control_converges() {
        let mut cfg = small(ExperimentConfig::fig2());
        cfg.problem.noise = TailSpec::none();
        cfg.problem.hessian_noise = TailSpec::none();
        let r = experiment_fig2(&cfg).unwrap();
        for m in FIG2_METHODS {
            assert_eq!(r.get(m).hit_fraction(), 1.0, "{m}");
        }
        assert_eq!(r.momentum_violations(), 0);
    }

    #[test]
    fn drivers_are_deterministic() {
        let cfg = small(ExperimentConfig::clip_sensitivity());
        let a = experiment_clip_sensitivity(&cfg)
            .unwrap()
            .table
            .to_csv_string();
        let b = experiment_clip_sensitivity(&cfg)
            .unwrap()
            .table
            .to_csv_string();
        assert_eq!(a, b);
        let cfg = small(ExperimentConfig::fig4());
        let a = experiment_fig4(&cfg).unwrap().table.to_csv_string();
        assert_eq!(a, experiment_fig4(&cfg).unwrap().table.to_csv_string());
    }

    #[test]
    fn huge_clip_level_matches_unclipped_on_noiseless_problem() {
        let mut cfg = small(ExperimentConfig::clip_sensitivity());
        cfg.problem.noise = TailSpec::none();
        cfg.problem.hessian_noise = TailSpec::none();
        cfg.sweep.lambdas = vec![1e300];
        let clipped = experiment_clip_sensitivity(&cfg).unwrap();
        let sched = Schedule::manual(0.01, 0.2).unwrap().with_g0(G0Init::Zero);
        let oracle = cfg.problem.build().unwrap();
        let plain = run(
            &OptimizerSpec::new(Method::NsgdHess),
            oracle.as_ref(),
            &sched,
            &cfg.problem.x0(),
            600,
            0,
        )
        .unwrap();
        assert_eq!(
            clipped.cells[0].summaries[0].hit,
            plain.iterations_to_target(1.5)
        );
    }

    #[test]
    fn fig5_rejects_empty_grid() {
        let mut cfg = ExperimentConfig::fig5();
        cfg.sweep.lambda_grids[0].clear();
        assert!(matches!(
            experiment_fig5(&cfg),
            Err(crate::error::Error::Config(_))
        ));
    }

    #[test]
    fn rate_refuses_undeclared_constants() {
        let mut cfg = ExperimentConfig::rate();
        cfg.problem.noise = TailSpec::pareto(1.2, 1.0);
        cfg.sweep.tail_margin = Some(-0.2);
        let err = experiment_rate(&cfg).unwrap_err();
        assert!(err.to_string().contains("moment"), "{err}");
    }

    #[test]
    fn derived_constants_for_quadratic() {
        let cfg = ExperimentConfig::rate();
        let p = cfg.problem.with_tail_index(2.0);
        let c = derive_constants(&p, 1.5, 100).unwrap();
        assert_eq!(c.l, 1.0);
        assert!((c.delta - 0.5 * p.x0().norm().powi(2)).abs() < 1e-12);
        assert!((c.sigma - (10.0f64 * 2.0 / 0.5).powf(1.0 / 1.5)).abs() < 1e-12);
    }

    #[test]
    fn hard_instance_table_marks_infeasible_rows() {
        let t = hard_instance_table(&[1e-6, 1e4], &[0.01], &[1.5], &[1.0], None).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[0][8], "infeasible");
        assert_eq!(t.rows[1][8], "ok");
    }
}

//! Command-line front end. Every subcommand writes one CSV table to stdout or
//! to `--out`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hessclip::hardinstance::{rescale_for_target, HardInstanceTarget};
use hessclip::harness::table::{fmt_f64, fmt_opt};
use hessclip::harness::{
    emit_csv, hard_instance_table, hard_instance_trace, run_experiment, ExperimentConfig,
    ExperimentKind, Table,
};
use hessclip::schedules::{
    schedule_clip_nsgdm_baseline, schedule_thm2_with_init, schedule_thm3, schedule_thm3_shape,
    thm3_gamma_arms, G0Init, ProblemConstants, Schedule,
};
use hessclip::{Error, Method, Result};

#[derive(Parser)]
#[command(
    name = "hessclip",
    version,
    about = "Normalized SGD with Hessian correction and clipping under heavy-tailed noise"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One trace of a single method.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Grid over clip levels, tail indices or horizons.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "clip-sensitivity")]
        experiment: SweepKind,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Method comparisons over seeds.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "fig2")]
        experiment: CompareKind,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Hard-instance parameters over a grid, or one optimizer trace on it.
    HardInstance {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "10")]
        delta: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.01")]
        epsilon: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.5,2")]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        sigma: Vec<f64>,
        #[arg(long)]
        sigma_h: Option<f64>,
        /// Run this method on the first grid point instead of printing the grid.
        #[arg(long)]
        trace: Option<Method>,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
    },
    /// Resolved schedules for the given constants.
    Schedule {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma_h: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4000)]
        t: u64,
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta_prob: f64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed of a single run, or first seed of a seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    ClipSensitivity,
    Fig4,
    Fig5,
    Rate,
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareKind {
    Fig2,
    Fig4,
}

fn resolve_config(
    common: &Common,
    kind: ExperimentKind,
    allowed: &[ExperimentKind],
    iterations: Option<usize>,
) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if !allowed.contains(&cfg.experiment) {
                return Err(Error::Config(format!(
                    "config experiment '{}' does not belong to this subcommand (expected one of {})",
                    cfg.experiment.label(),
                    allowed.iter().map(|k| k.label()).collect::<Vec<_>>().join(", ")
                )));
            }
            cfg
        }
        None => ExperimentConfig::preset(kind),
    };
    match (common.seed, common.seeds) {
        (first, Some(n)) => {
            if n == 0 {
                return Err(Error::Config("--seeds must be at least 1".into()));
            }
            cfg = cfg.with_seed_count(n, first.unwrap_or(0));
        }
        (Some(s), None) if cfg.experiment == ExperimentKind::Run => cfg.seeds = vec![s],
        (Some(s), None) => {
            let n = cfg.seeds.len();
            cfg = cfg.with_seed_count(n, s);
        }
        (None, None) => {}
    }
    if let Some(t) = iterations {
        cfg.iterations = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(table: &Table, common: &Common) -> Result<()> {
    let Format::Csv = common.format;
    match &common.out {
        Some(path) => emit_csv(table, path),
        None => table.write_to(std::io::stdout().lock()),
    }
}

fn schedule_row(t: &mut Table, name: &str, s: &Schedule) {
    t.push(vec![
        name.to_string(),
        fmt_f64(s.gamma),
        fmt_f64(s.alpha),
        fmt_opt(s.lambda),
        fmt_opt(s.lambda_h_bar),
        s.b_init().to_string(),
    ]);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            common,
            method,
            iterations,
        } => {
            let mut cfg = resolve_config(
                &common,
                ExperimentKind::Run,
                &[ExperimentKind::Run],
                iterations,
            )?;
            if let Some(m) = method {
                cfg.optimizer.method = m;
            }
            write(&run_experiment(&cfg)?, &common)
        }
        Command::Sweep {
            common,
            experiment,
            iterations,
        } => {
            let kind = match experiment {
                SweepKind::ClipSensitivity => ExperimentKind::ClipSensitivity,
                SweepKind::Fig4 => ExperimentKind::Fig4,
                SweepKind::Fig5 => ExperimentKind::Fig5,
                SweepKind::Rate => ExperimentKind::Rate,
            };
            let allowed = [
                ExperimentKind::ClipSensitivity,
                ExperimentKind::Fig4,
                ExperimentKind::Fig5,
                ExperimentKind::Rate,
            ];
            let cfg = resolve_config(&common, kind, &allowed, iterations)?;
            write(&run_experiment(&cfg)?, &common)
        }
        Command::Compare {
            common,
            experiment,
            iterations,
        } => {
            let kind = match experiment {
                CompareKind::Fig2 => ExperimentKind::Fig2,
                CompareKind::Fig4 => ExperimentKind::Fig4,
            };
            let cfg = resolve_config(
                &common,
                kind,
                &[ExperimentKind::Fig2, ExperimentKind::Fig4],
                iterations,
            )?;
            write(&run_experiment(&cfg)?, &common)
        }
        Command::HardInstance {
            common,
            delta,
            epsilon,
            p,
            sigma,
            sigma_h,
            trace,
            horizon,
            gamma,
            alpha,
        } => {
            if common.config.is_some() {
                return Err(Error::Config(
                    "hard-instance takes its grid from flags, not --config".into(),
                ));
            }
            let table = match trace {
                None => hard_instance_table(&delta, &epsilon, &p, &sigma, sigma_h)?,
                Some(method) => {
                    if method.uses_hvp() && sigma_h.is_none() {
                        return Err(Error::Config(format!(
                            "{method} queries Hessian products; pass --sigma-h for a second-order oracle"
                        )));
                    }
                    let mut target =
                        HardInstanceTarget::new(delta[0], 1.0, sigma[0], epsilon[0], p[0]);
                    target.sigma2 = sigma_h;
                    let oracle = rescale_for_target(&target)?;
                    let mut schedule = Schedule::manual(gamma, alpha)?;
                    if matches!(method, Method::ClipNsgdm | Method::ClipNsgdHess) {
                        schedule = schedule.with_clipping(1.0, 1.0 / gamma)?;
                    }
                    hard_instance_trace(
                        &oracle,
                        method,
                        &schedule,
                        horizon,
                        common.seed.unwrap_or(0),
                    )?
                }
            };
            write(&table, &common)
        }
        Command::Schedule {
            common,
            delta,
            l,
            sigma,
            sigma_h,
            p,
            t,
            epsilon,
            delta_prob,
        } => {
            if common.config.is_some() {
                return Err(Error::Config(
                    "schedule takes its constants from flags, not --config".into(),
                ));
            }
            let mut c = ProblemConstants::new(delta, l, sigma, sigma_h, p, t);
            c.epsilon = epsilon;
            c.delta_prob = delta_prob;
            c.validate()?;
            let mut table = Table::new(&[
                "schedule",
                "gamma",
                "alpha",
                "lambda",
                "lambda_h_bar",
                "b_init",
            ]);
            table
                .meta("delta", fmt_f64(delta))
                .meta("l", fmt_f64(l))
                .meta("sigma", fmt_f64(sigma))
                .meta("sigma_h", fmt_f64(sigma_h))
                .meta("p", fmt_f64(p))
                .meta("t", t)
                .meta("epsilon", fmt_f64(epsilon))
                .meta("delta_prob", fmt_f64(delta_prob));
            for (name, init) in [
                ("thm2-batch", G0Init::Batch(0)),
                ("thm2-exact", G0Init::Exact),
                ("thm2-zero", G0Init::Zero),
            ] {
                schedule_row(&mut table, name, &schedule_thm2_with_init(&c, init)?);
            }
            schedule_row(&mut table, "thm3", &schedule_thm3(&c)?);
            schedule_row(&mut table, "thm3-shape", &schedule_thm3_shape(&c, 1.0)?);
            schedule_row(
                &mut table,
                "clip-nsgdm-baseline",
                &schedule_clip_nsgdm_baseline(t, p)?,
            );
            let arms = thm3_gamma_arms(&c)?;
            table.meta(
                "thm3_gamma_arms",
                arms.iter()
                    .map(|a| fmt_f64(*a))
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            write(&table, &common)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hessclip: {e}");
            ExitCode::from(2)
        }
    }
}

//! Closed-form parameters for given problem constants, and the sample
//! complexity regimes they imply.
//!
//! cargo run --release --example schedules

use hessclip::schedules::{
    epsilon_for_budget, predicted_sample_complexity, schedule_clip_nsgdm_baseline, schedule_thm2,
    schedule_thm3, thm2_batch_size, ProblemConstants, Regime,
};

fn main() -> hessclip::Result<()> {
    for p in [1.25, 1.5, 2.0] {
        let mut c = ProblemConstants::new(1.0, 1.0, 1.0, 1.0, p, 4000);
        c.epsilon = 0.1;
        let s2 = schedule_thm2(&c)?;
        let s3 = schedule_thm3(&c)?;
        let base = schedule_clip_nsgdm_baseline(c.t, p)?;
        println!("p = {p}");
        println!(
            "  thm2      gamma {:.3e}  alpha {:.3e}  B_init {}",
            s2.gamma,
            s2.alpha,
            thm2_batch_size(c.sigma, c.epsilon, p)
        );
        println!(
            "  thm3      gamma {:.3e}  alpha {:.3e}  lambda {:.3}  lambda_h_bar {:.3}",
            s3.gamma,
            s3.alpha,
            s3.lambda.unwrap_or_default(),
            s3.lambda_h_bar.unwrap_or_default()
        );
        println!(
            "  baseline  gamma {:.3e}  alpha {:.3e}",
            base.gamma, base.alpha
        );
        for regime in [Regime::UpperThm2, Regime::LowerBound] {
            let n = predicted_sample_complexity(&c, regime)?;
            let eps = epsilon_for_budget(&c, regime, 1e6)?;
            println!("  {regime:?}: {n:.3e} samples at eps = 0.1, eps = {eps:.4} at 1e6 samples");
        }
    }
    Ok(())
}

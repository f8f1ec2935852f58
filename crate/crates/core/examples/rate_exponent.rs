//! Log-log slope of the average gradient norm against the horizon.
//!
//! cargo run --release --example rate_exponent

use hessclip::harness::{experiment_rate, ExperimentConfig};

fn main() -> hessclip::Result<()> {
    let cfg = ExperimentConfig::rate();
    let result = experiment_rate(&cfg)?;
    for s in &result.series {
        println!(
            "p = {} (tail index {}): slope {:.3}, predicted {:.3}",
            s.p, s.tail_index, s.slope, s.predicted
        );
        for pt in &s.points {
            println!(
                "  T = {:>6}  median avg |grad F| = {:.4}",
                pt.horizon, pt.median_avg_grad_norm
            );
        }
    }
    Ok(())
}

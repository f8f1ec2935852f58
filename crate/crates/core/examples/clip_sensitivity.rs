//! Iterations to reach |grad F| <= 3/2 as the clip level varies over 19 decades.
//!
//! cargo run --release --example clip_sensitivity

use hessclip::harness::{experiment_clip_sensitivity, ExperimentConfig};

fn main() -> hessclip::Result<()> {
    let cfg = ExperimentConfig::clip_sensitivity();
    let result = experiment_clip_sensitivity(&cfg)?;
    println!("{:>10} {:>12} {:>8}", "lambda", "median iters", "reached");
    for c in &result.cells {
        println!(
            "{:>10.0e} {:>12} {:>5}/{}",
            c.lambda.unwrap(),
            c.median_iterations,
            c.reached,
            c.summaries.len()
        );
    }
    Ok(())
}

//! Gradient clip sweeps at three Hessian clip levels, target |grad F| <= 1/2.
//!
//! cargo run --release --example hvp_clip_grid

use hessclip::harness::{experiment_fig5, ExperimentConfig};

fn main() -> hessclip::Result<()> {
    let cfg = ExperimentConfig::fig5();
    let result = experiment_fig5(&cfg)?;
    let mut group = String::new();
    for c in &result.cells {
        if c.label != group {
            group = c.label.clone();
            println!("{group}");
        }
        println!(
            "  lambda {:>8.0e}: median {:>6} ({} of {} reached)",
            c.lambda.unwrap(),
            c.median_iterations,
            c.reached,
            c.summaries.len()
        );
    }
    Ok(())
}

//! Clip NSGDHess against Clip NSGDM as the noise tail index goes from 1.1 to 2.
//!
//! cargo run --release --example tail_index_sweep

use hessclip::harness::{experiment_fig4, ExperimentConfig};

fn main() -> hessclip::Result<()> {
    let cfg = ExperimentConfig::fig4();
    let result = experiment_fig4(&cfg)?;
    println!(
        "{:>5} {:>16} {:>12}",
        "tail", "clip-nsgd-hess", "clip-nsgdm"
    );
    for pair in result.cells.chunks(2) {
        println!(
            "{:>5.1} {:>16} {:>12}",
            pair[0].tail_index, pair[0].median_iterations, pair[1].median_iterations
        );
    }
    Ok(())
}

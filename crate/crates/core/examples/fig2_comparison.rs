//! Clipped against unclipped momentum methods under tail index 1.1 noise.
//!
//! cargo run --release --example fig2_comparison [-- out.csv]

use hessclip::harness::{emit_csv, experiment_fig2, ExperimentConfig};

fn main() -> hessclip::Result<()> {
    let cfg = ExperimentConfig::fig2();
    let result = experiment_fig2(&cfg)?;
    println!(
        "x0 norm {:.3}, {} seeds, T = {}",
        cfg.problem.x0().norm(),
        cfg.seeds.len(),
        cfg.iterations
    );
    for r in &result.runs {
        println!(
            "{:>15}  median terminal |grad F| {:.4}  reached {} in {:.0}% of seeds",
            r.method.label(),
            r.median_terminal(),
            cfg.target,
            100.0 * r.hit_fraction()
        );
    }
    if let Some(path) = std::env::args().nth(1) {
        emit_csv(&result.table, path.as_ref())?;
    }
    Ok(())
}

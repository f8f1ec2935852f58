//! One Clip NSGDHess run on the noisy quadratic, printed every 500 steps.
//!
//! cargo run --release --example quickstart

use hessclip::noise::TailSpec;
use hessclip::{run, DenseVector, Method, OptimizerSpec, QuadraticProblem, Schedule};

fn main() -> hessclip::Result<()> {
    let problem =
        QuadraticProblem::new(10, TailSpec::pareto(1.5, 1.0), TailSpec::pareto(1.5, 1.0))?;
    let x0 = DenseVector::new(vec![1.0; 10])?;
    let schedule = Schedule::manual(0.01, 0.2)?.with_clipping(1.0, 100.0)?;
    let trace = run(
        &OptimizerSpec::new(Method::ClipNsgdHess),
        &problem,
        &schedule,
        &x0,
        2000,
        7,
    )?;
    for row in trace.rows.iter().step_by(500) {
        println!(
            "t={:>5}  |grad F|={:.4}  |g|={:.4}  samples={}",
            row.t, row.grad_norm, row.momentum_norm, row.samples_used
        );
    }
    match trace.iterations_to_target(0.5) {
        Some(t) => println!("reached |grad F| <= 0.5 after {t} iterations"),
        None => println!("did not reach |grad F| <= 0.5"),
    }
    Ok(())
}

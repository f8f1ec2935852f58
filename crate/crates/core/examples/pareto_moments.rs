//! Empirical absolute moments of two-sided Pareto noise: finite below the tail
//! index, growing without bound above it.
//!
//! cargo run --release --example pareto_moments

use hessclip::noise::{estimate_moment, sample_two_sided_pareto, TailSpec};
use hessclip::RandomSource;

fn main() -> hessclip::Result<()> {
    let spec = TailSpec::pareto(2.0, 1.0);
    let mut r = RandomSource::new(11, 0);
    let samples = (0..1_000_000)
        .map(|_| sample_two_sided_pareto(&spec, &mut r))
        .collect::<hessclip::Result<Vec<f64>>>()?;
    println!("tail index {}, scale {}", spec.tail_index, spec.scale);
    for q in [0.5, 1.0, 1.5, 2.0, 2.5] {
        let exact = spec
            .scalar_abs_moment(q)
            .map_or("inf".to_string(), |m| format!("{m:.4}"));
        print!("  E|X|^{q:<4} exact {exact:>7}  empirical by n:");
        for n in [1_000, 10_000, 100_000, 1_000_000] {
            print!(" {:>9.4}", estimate_moment(&samples[..n], q)?.value);
        }
        println!();
    }
    Ok(())
}

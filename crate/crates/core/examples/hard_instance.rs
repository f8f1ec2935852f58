//! The zero-chain hard instance: rescaled parameters over a grid, then a
//! Clip NSGDHess run whose progress grows by at most one coordinate per query.
//!
//! cargo run --release --example hard_instance

use hessclip::hardinstance::{phi, phi_by_quadrature, rescale_for_target, HardInstanceTarget};
use hessclip::harness::hard_instance_table;
use hessclip::harness::hard_instance_trace;
use hessclip::{Method, Schedule};

fn main() -> hessclip::Result<()> {
    println!(
        "Phi(0) = {:.10}, by quadrature {:.10}",
        phi(0.0),
        phi_by_quadrature(0.0)
    );
    let grid = hard_instance_table(&[10.0, 100.0], &[0.1, 0.01], &[1.5, 2.0], &[1.0], None)?;
    print!("{}", grid.to_csv_string());

    let mut target = HardInstanceTarget::new(10.0, 1.0, 1.0, 0.01, 1.5);
    target.sigma2 = Some(1.0);
    let oracle = rescale_for_target(&target)?;
    let schedule = Schedule::manual(0.01, 0.1)?.with_clipping(1.0, 100.0)?;
    let trace = hard_instance_trace(&oracle, Method::ClipNsgdHess, &schedule, 3000, 1)?;
    let prog = trace.column("prog").expect("prog column");
    let grad = trace.column("grad_norm").expect("grad_norm column");
    println!("T_dim = {}, rho = {:.4}", oracle.chain.t_dim, oracle.rho);
    for row in trace.rows.iter().step_by(300) {
        println!(
            "  t={:>5}  prog={}  |grad F|={}",
            row[0], row[prog], row[grad]
        );
    }
    Ok(())
}

//! Light-cone fit of defects after a quench.
//!
//! Run with `cargo run --release --example light_cone`.

use spinbell::analysis::{fit_light_cone, sweep, DefectObservables, Prepared, SweepPlan};
use spinbell::correlators::Partition;
use spinbell::operators::xy_chain_hamiltonian;
use spinbell::seesaw::SeesawOptions;
use spinbell::states::{EigenSystem, QuantumState};
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let lat = Lattice::chain(10)?;
    let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 10])?;
    let prep = Prepared::Evolving {
        eig: Box::new(EigenSystem::new(&h)?),
        initial: QuantumState::basis(&[false; 10]),
        t: 0.4,
    };
    // Short times: the defect is still growing from zero.
    let plan = SweepPlan {
        parties: 3,
        width: 1,
        taus: vec![1, 2, 3, 4],
        times: vec![0.1, 0.2, 0.3, 0.4],
        partition: Partition::Sequential,
        observables: DefectObservables::Optimized,
        seesaw: SeesawOptions {
            restarts: 8,
            seed: 2,
            ..Default::default()
        },
        inequality: None,
    };
    let rows = sweep(&prep, &lat, &plan)?;
    for r in &rows {
        println!("τ = {}, t = {:.1}: defect {:.4e}", r.tau, r.t, r.defect);
    }
    let pts: Vec<(f64, f64, f64)> = rows.iter().map(|r| (r.tau as f64, r.t, r.defect)).collect();
    let fit = fit_light_cone(&pts)?;
    println!(
        "v = {:.4}, κ = {:.4}, c = {:.4}, residual {:.3}",
        fit.v_est, fit.kappa_est, fit.c_est, fit.residual
    );
    Ok(())
}

//! Separation sweep on a thermal state, decay fit and critical separation.
//!
//! Run with `cargo run --release --example decay_fit`.

use spinbell::analysis::{
    fit_decay, sweep, tau_star, DefectObservables, Normalization, Prepared, StateFamily, SweepPlan,
};
use spinbell::bell::svetlichny3;
use spinbell::correlators::Partition;
use spinbell::operators::xy_chain_hamiltonian;
use spinbell::seesaw::SeesawOptions;
use spinbell::states::EigenSystem;
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let lat = Lattice::chain(10)?;
    let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 10])?;
    let beta = 0.1;
    let prep = Prepared::Static {
        state: EigenSystem::new(&h)?.gibbs(beta)?,
        family: StateFamily::Gibbs { beta },
        spectral: None,
    };
    let plan = SweepPlan {
        parties: 3,
        width: 1,
        taus: (1..=4).collect(),
        times: vec![0.0],
        partition: Partition::Sequential,
        observables: DefectObservables::Optimized,
        seesaw: SeesawOptions {
            restarts: 10,
            seed: 5,
            ..Default::default()
        },
        inequality: Some(svetlichny3()),
    };
    let rows = sweep(&prep, &lat, &plan)?;
    for r in &rows {
        println!(
            "τ = {}: defect {:.4e}, S = {:.6}",
            r.tau,
            r.defect,
            r.bell_value.unwrap_or(f64::NAN)
        );
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.tau as f64, r.defect)).collect();
    let fit = fit_decay(&pts, Normalization::Raw, 1)?;
    println!(
        "c = {:.4}, κ = {:.4}, r² = {:.6}",
        fit.c_est, fit.kappa_est, fit.r_squared
    );
    println!(
        "τ* at δ = 0.01: {:.3}",
        tau_star(&fit, 0.01, svetlichny3().eta())?
    );
    Ok(())
}

//! Quench dynamics from a product state.
//!
//! Run with `cargo run --release --example time_evolution`.

use spinbell::correlators::defect_sequential;
use spinbell::operators::{xy_chain_hamiltonian, Observable, Pauli};
use spinbell::states::{EigenSystem, QuantumState};
use spinbell::{Lattice, Result};

fn main() -> Result<()> {
    let lat = Lattice::chain(10)?;
    let h = xy_chain_hamiltonian(&lat, 0.5, &[1.0; 10])?;
    let eig = EigenSystem::new(&h)?;
    let psi0 = QuantumState::basis(&[false; 10]);
    let obs = [
        Observable::pauli(Pauli::Z, 1),
        Observable::pauli(Pauli::Z, 4),
        Observable::pauli(Pauli::Z, 7),
    ];
    // Correlations between separated sites build up only after a delay.
    for t in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let psi = eig.evolve(&psi0, t)?;
        let d = defect_sequential(&psi, &obs)?;
        println!("t = {t:4}: defect {:.3e}", d.defect);
    }
    Ok(())
}
